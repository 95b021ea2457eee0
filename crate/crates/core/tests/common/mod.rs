#![allow(dead_code)]

use framelab::constructors::{GaussianStream, Seed};
use framelab::linalg::{inv_sqrt_psd, CMatrix};
use framelab::{Frame, ScalarField};
use proptest::prelude::*;

pub fn field_strategy() -> impl Strategy<Value = ScalarField> {
    prop_oneof![Just(ScalarField::Real), Just(ScalarField::Complex)]
}

/// `(m, n)` with `1 <= n < m <= max_m`.
pub fn shape_strategy(max_m: usize) -> impl Strategy<Value = (usize, usize)> {
    (2..=max_m).prop_flat_map(|m| (Just(m), 1..m))
}

/// Haar-like unitary: polar factor of a Gaussian matrix.
pub fn random_unitary(n: usize, field: ScalarField, seed: u64) -> CMatrix {
    let g = GaussianStream::new(Seed(seed)).matrix(n, n, field);
    let mut u = inv_sqrt_psd(&(&g * g.adjoint())).expect("Gaussian matrix is invertible") * g;
    if field == ScalarField::Real {
        u.iter_mut().for_each(|z| z.im = 0.0);
    }
    u
}

pub fn gaussian_frame(n: usize, m: usize, field: ScalarField, seed: u64) -> Frame {
    Frame::new(field, GaussianStream::new(Seed(seed)).matrix(n, m, field)).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
