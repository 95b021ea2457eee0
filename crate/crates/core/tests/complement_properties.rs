mod common;

use common::*;
use framelab::constructors::{harmonic_frame, naimark_complement, random_parseval, simplex_etf, Seed};
use framelab::linalg::{binomial, frobenius};
use framelab::measures::{
    equal_volume_constant, nuclear_energy, total_coherence, total_comp_volume, total_volume, volumes,
};
use framelab::{gram, partial_frame, predicates, subsets, Frame, SubsetSelector, Tolerances};
use proptest::prelude::*;

fn sv(f: &Frame, s: &SubsetSelector) -> Vec<f64> {
    framelab::frame::singular_values(&partial_frame(f, s).unwrap()).unwrap()
}

fn etfs() -> Vec<Frame> {
    let mut v: Vec<Frame> = (1..=10).map(|n| simplex_etf(n).unwrap()).collect();
    v.push(harmonic_frame(7, &SubsetSelector::new(7, vec![1, 2, 4]).unwrap()).unwrap());
    v.push(harmonic_frame(7, &SubsetSelector::new(7, vec![3, 5, 6]).unwrap()).unwrap());
    v.push(harmonic_frame(13, &SubsetSelector::new(13, vec![0, 1, 3, 9]).unwrap()).unwrap());
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn double_complement_has_same_gram((m, n) in shape_strategy(9), field in field_strategy(), seed in any::<u64>()) {
        let f = random_parseval(m, n, field, Seed(seed)).unwrap();
        let back = naimark_complement(&naimark_complement(&f).unwrap()).unwrap();
        prop_assert!(frobenius(&(gram(&back).entries() - gram(&f).entries())) <= 1e-8);
    }

    #[test]
    fn complement_gram_is_identity_minus_gram((m, n) in shape_strategy(9), field in field_strategy(), seed in any::<u64>()) {
        let f = random_parseval(m, n, field, Seed(seed)).unwrap();
        let psi = naimark_complement(&f).unwrap();
        prop_assert_eq!(psi.n_dim(), m - n);
        prop_assert_eq!(psi.field(), field);
        let sum = gram(&psi).entries() + gram(&f).entries();
        prop_assert!(frobenius(&(sum - framelab::CMatrix::identity(m, m))) <= 1e-10);
        prop_assert!((total_coherence(&f) - total_coherence(&psi)).abs() <= 1e-9);
    }

    #[test]
    fn complement_singular_values_pad_with_ones((m, n) in shape_strategy(8), field in field_strategy(), seed in any::<u64>()) {
        let f = random_parseval(m, n, field, Seed(seed)).unwrap();
        let psi = naimark_complement(&f).unwrap();
        let d = m - n;
        for k in 1..=n {
            for s in subsets(m, k).unwrap() {
                let phi_sv = sv(&f, &s);
                let psi_sv = sv(&psi, &s.complement_selector().unwrap());
                let drop = k.saturating_sub(d);
                let mut expected = vec![1.0; d.saturating_sub(k)];
                expected.extend_from_slice(&phi_sv[drop..]);
                prop_assert!(max_abs_diff(&expected, &psi_sv) <= 1e-9, "K={:?}", s.indices());
                for x in &phi_sv[..drop] {
                    prop_assert!((x - 1.0).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn volume_equals_complementary_volume_of_complement(
        (m, n) in shape_strategy(8), field in field_strategy(), seed in any::<u64>()
    ) {
        let f = random_parseval(m, n, field, Seed(seed)).unwrap();
        let psi = naimark_complement(&f).unwrap();
        for k in 1..=n {
            let v = total_volume(&f, k).unwrap();
            let cv = total_comp_volume(&psi, m - k).unwrap();
            prop_assert!((v - cv).abs() <= 1e-8);
        }
    }

    #[test]
    fn nuclear_energy_offset((m, n) in shape_strategy(8), field in field_strategy(), seed in any::<u64>()) {
        let f = random_parseval(m, n, field, Seed(seed)).unwrap();
        let psi = naimark_complement(&f).unwrap();
        for k in 1..m {
            let lhs = nuclear_energy(&psi, m - k).unwrap() - nuclear_energy(&f, k).unwrap();
            let rhs = (m as f64 - n as f64 - k as f64) * binomial(m, k) as f64;
            prop_assert!((lhs - rhs).abs() <= 1e-7, "k={k}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn constructed_etfs_are_equiangular() {
    for f in etfs() {
        let p = predicates(&f, &Tolerances::default()).unwrap();
        assert!(p.is_equiangular, "{}x{}: {:?}", f.n_dim(), f.n_vecs(), p.residuals);
    }
}

#[test]
fn equal_two_volumes_carry_to_complement() {
    for f in etfs() {
        let (m, n) = (f.n_vecs(), f.n_dim());
        if n < 2 || m - n < 2 {
            continue;
        }
        let target = equal_volume_constant(m, n, 2);
        assert!(volumes(&f, 2).unwrap().iter().all(|v| (v - target).abs() <= 1e-9));
        let psi = naimark_complement(&f).unwrap();
        let target = equal_volume_constant(m, m - n, 2);
        for v in volumes(&psi, 2).unwrap() {
            assert!((v - target).abs() <= 1e-9, "{m},{n}: {v} vs {target}");
        }
    }
}
