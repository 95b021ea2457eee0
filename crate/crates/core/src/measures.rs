//! Scalar functionals of frames: total coherence, equiangular distances,
//! total k-volumes, complementary volumes, nuclear energies, spark,
//! Plücker coordinates and coherence, together with their closed-form bounds.
//!
//! Sums written `Σ_{i≠j}` run over ordered pairs, so every unordered pair is
//! counted twice. Sums over `|K| = k` visit subsets in lexicographic order and
//! are always accumulated sequentially.

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::frame::{gram, partial_frame, predicates, subsets, Frame, FramePredicates, SubsetSelector, Tolerances};
use crate::linalg::{self, binomial_f64, C64, EPS_RANK};

pub use crate::frame::welch_constant;

/// Negative determinants above this magnitude are treated as errors, not roundoff.
pub const DET_CLAMP: f64 = 1e-12;

/// Default largest frame for which spark is searched.
pub const DEFAULT_SPARK_CAP: usize = 20;

fn require_proper(frame: &Frame) -> Result<(usize, usize)> {
    let (n, m) = (frame.n_dim(), frame.n_vecs());
    if n >= m {
        return Err(FrameError::InvalidShape(format!("requires N < M, got N={n}, M={m}")));
    }
    Ok((m, n))
}

/// `TC(Φ) = Σ_{i≠j} |<φ_i, φ_j>|`.
pub fn total_coherence(frame: &Frame) -> f64 {
    let g = gram(frame);
    let m = frame.n_vecs();
    let mut sum = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                sum += g.get(i, j).norm();
            }
        }
    }
    sum
}

/// `c_{M,N,k} = sqrt(C(N,k) / C(M,k))`, evaluated as a product of ratios.
pub fn equal_volume_constant(m: usize, n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).map(|j| (n - j) as f64 / (m - j) as f64).product::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KConstants {
    pub k: usize,
    /// Common k-volume of a frame whose k-volumes are all equal (k <= N).
    pub c_mnk: Option<f64>,
    pub vk_lower: Option<f64>,
    pub vk_upper: Option<f64>,
    /// Upper bound on the total complementary volume (k >= N).
    pub cvk_upper: Option<f64>,
    /// `N C(M-1, k-1)`, the sum of squared singular values over all k-subsets.
    pub ne_energy_identity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquiangularConstants {
    pub m: usize,
    pub n: usize,
    pub c_mn: f64,
    pub tc_upper: f64,
    pub tc_lower: f64,
    pub per_k: Vec<KConstants>,
}

impl EquiangularConstants {
    pub fn for_k(&self, k: usize) -> Option<&KConstants> {
        self.per_k.iter().find(|c| c.k == k)
    }
}

pub fn equiangular_constants(m: usize, n: usize, k_list: &[usize]) -> Result<EquiangularConstants> {
    if n == 0 || n >= m {
        return Err(FrameError::InvalidShape(format!(
            "constants need 0 < N < M, got M={m}, N={n}"
        )));
    }
    let per_k = k_list
        .iter()
        .map(|&k| {
            if k == 0 || k > m {
                return Err(FrameError::InvalidShape(format!("k={k} not in 1..={m}")));
            }
            let small = k <= n;
            Ok(KConstants {
                k,
                c_mnk: small.then(|| equal_volume_constant(m, n, k)),
                vk_lower: small.then(|| binomial_f64(n, k)),
                vk_upper: small.then(|| (binomial_f64(m, k) * binomial_f64(n, k)).sqrt()),
                cvk_upper: (k >= n).then(|| (binomial_f64(m, k) * binomial_f64(m - n, m - k)).sqrt()),
                ne_energy_identity: n as f64 * binomial_f64(m - 1, k - 1),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (mf, nf) = (m as f64, n as f64);
    Ok(EquiangularConstants {
        m,
        n,
        c_mn: welch_constant(m, n),
        tc_upper: (nf * (mf - nf) * (mf - 1.0)).sqrt(),
        tc_lower: n.max(m - n) as f64,
        per_k,
    })
}

fn norm_variance(frame: &Frame) -> f64 {
    let target = frame.n_dim() as f64 / frame.n_vecs() as f64;
    frame.column_norms_sq().iter().map(|x| (x - target).powi(2)).sum()
}

fn offdiag_sq_dev(frame: &Frame, center: f64) -> f64 {
    let g = gram(frame);
    let m = frame.n_vecs();
    let mut sum = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                sum += (g.get(i, j).norm() - center).powi(2);
            }
        }
    }
    sum
}

/// Frobenius distance squared between the Gram matrix and that of a
/// (possibly nonexistent) equiangular Parseval frame.
pub fn equiangular_distance(frame: &Frame) -> Result<f64> {
    let (m, n) = require_proper(frame)?;
    Ok(norm_variance(frame) + offdiag_sq_dev(frame, welch_constant(m, n)))
}

/// Closed form of the equiangular distance valid for Parseval frames.
pub fn equiangular_distance_parseval_identity(m: usize, n: usize, tc: f64) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    let c = welch_constant(m, n);
    nf - nf * nf / mf + mf * (mf - 1.0) * c * c - 2.0 * c * tc
}

/// Gram variance `V(Φ)` and the mean off-diagonal magnitude `c_Φ`.
pub fn gram_variance(frame: &Frame) -> (f64, f64) {
    let m = frame.n_vecs();
    let c_phi = if m > 1 {
        total_coherence(frame) / (m * (m - 1)) as f64
    } else {
        0.0
    };
    (norm_variance(frame) + offdiag_sq_dev(frame, c_phi), c_phi)
}

/// `N(M-N)/M - TC^2 / (M(M-1))`, the Gram variance of a Parseval frame.
pub fn gram_variance_parseval_identity(m: usize, n: usize, tc: f64) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    nf * (mf - nf) / mf - tc * tc / (mf * (mf - 1.0))
}

/// `AD(Φ) = Σ_{i≠j} (|<φ_i, φ_j>| - c_{M,N})^2`.
pub fn angular_deviation(frame: &Frame) -> Result<f64> {
    let (m, n) = require_proper(frame)?;
    Ok(offdiag_sq_dev(frame, welch_constant(m, n)))
}

fn clamped_sqrt_det(det: f64) -> Result<f64> {
    if det < -DET_CLAMP {
        return Err(FrameError::NumericalFailure(format!("negative determinant {det:e}")));
    }
    Ok(det.max(0.0).sqrt())
}

/// k-dimensional volume `sqrt(det(Φ_K* Φ_K))`.
pub fn volume(frame: &Frame, k_set: &SubsetSelector) -> Result<f64> {
    if k_set.k() > frame.n_dim() {
        return Err(FrameError::InvalidShape(format!(
            "volume needs |K| <= N, got {} > {}",
            k_set.k(),
            frame.n_dim()
        )));
    }
    let sub = partial_frame(frame, k_set)?;
    clamped_sqrt_det(linalg::hermitian_det(gram(&sub).entries()))
}

/// Aggregates of `v_k(Φ_K)` over all `|K| = k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeStats {
    pub k: usize,
    pub total: f64,
    pub sum_sq: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

pub fn volume_stats(frame: &Frame, k: usize) -> Result<VolumeStats> {
    let (n, m) = (frame.n_dim(), frame.n_vecs());
    if k == 0 || k > n {
        return Err(FrameError::InvalidShape(format!(
            "volume needs 1 <= k <= N, got k={k}, N={n}"
        )));
    }
    let g = gram(frame);
    let mut vols = Vec::new();
    for s in subsets(m, k)? {
        vols.push(clamped_sqrt_det(linalg::hermitian_det(&g.principal(&s)))?);
    }
    let total: f64 = vols.iter().sum();
    let mean = total / vols.len() as f64;
    Ok(VolumeStats {
        k,
        total,
        sum_sq: vols.iter().map(|v| v * v).sum(),
        variance: vols.iter().map(|v| (v - mean).powi(2)).sum(),
        min: vols.iter().copied().fold(f64::INFINITY, f64::min),
        max: vols.iter().copied().fold(0.0, f64::max),
        count: vols.len(),
    })
}

/// All k-volumes in lexicographic subset order.
pub fn volumes(frame: &Frame, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > frame.n_dim() {
        return Err(FrameError::InvalidShape(format!("volume needs 1 <= k <= N, got k={k}")));
    }
    let g = gram(frame);
    subsets(frame.n_vecs(), k)?
        .map(|s| clamped_sqrt_det(linalg::hermitian_det(&g.principal(&s))))
        .collect()
}

/// `V_k(Φ) = Σ_{|K|=k} v_k(Φ_K)`.
pub fn total_volume(frame: &Frame, k: usize) -> Result<f64> {
    Ok(volume_stats(frame, k)?.total)
}

/// `Σ_{|K|=k} v_k(Φ_K)^2`, the sum of principal k x k minors of the Gram matrix.
pub fn sum_sq_volume(frame: &Frame, k: usize) -> Result<f64> {
    Ok(volume_stats(frame, k)?.sum_sq)
}

pub fn volume_variance(frame: &Frame, k: usize) -> Result<f64> {
    Ok(volume_stats(frame, k)?.variance)
}

/// Complementary volume `sqrt(det(Φ_K Φ_K*))` for `|K| >= N`.
pub fn comp_volume(frame: &Frame, k_set: &SubsetSelector) -> Result<f64> {
    if k_set.k() < frame.n_dim() {
        return Err(FrameError::InvalidShape(format!(
            "complementary volume needs |K| >= N, got {} < {}",
            k_set.k(),
            frame.n_dim()
        )));
    }
    let sub = partial_frame(frame, k_set)?;
    clamped_sqrt_det(linalg::hermitian_det(sub.frame_operator().entries()))
}

pub fn comp_volumes(frame: &Frame, k: usize) -> Result<Vec<f64>> {
    if k < frame.n_dim() || k > frame.n_vecs() {
        return Err(FrameError::InvalidShape(format!(
            "complementary volume needs N <= k <= M, got k={k}"
        )));
    }
    subsets(frame.n_vecs(), k)?.map(|s| comp_volume(frame, &s)).collect()
}

/// `CV_k(Φ) = Σ_{|K|=k} cv_k(Φ_K)`.
pub fn total_comp_volume(frame: &Frame, k: usize) -> Result<f64> {
    Ok(comp_volumes(frame, k)?.iter().sum())
}

/// Nuclear norm `‖Φ_K‖_*`.
pub fn nuclear_norm(frame: &Frame, k_set: &SubsetSelector) -> Result<f64> {
    Ok(linalg::singular_values(partial_frame(frame, k_set)?.entries())?
        .iter()
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuclearStats {
    pub k: usize,
    /// `NE_k(Φ)`.
    pub energy: f64,
    /// `Σ_K Σ_i σ_i(Φ_K)^2`.
    pub sum_sq_singular: f64,
    /// `NVar_k(Φ)` summed directly.
    pub variance: f64,
    /// `Σ_K Σ_i σ_i^2 - NE_k^2 / (min(N,k) C(M,k))`; equals `variance` for any frame.
    pub variance_identity: f64,
    /// Mean singular value `n_{Φ,k}`.
    pub mean_singular: f64,
    /// Mean nuclear norm `d_{Φ,k}`.
    pub mean_nuclear: f64,
    /// `Σ_K (‖Φ_K‖_* - d_{Φ,k})^2`.
    pub nuclear_norm_spread: f64,
}

pub fn nuclear_stats(frame: &Frame, k: usize) -> Result<NuclearStats> {
    let (n, m) = (frame.n_dim(), frame.n_vecs());
    if k == 0 || k > m {
        return Err(FrameError::InvalidShape(format!(
            "nuclear energy needs 1 <= k <= M, got k={k}"
        )));
    }
    let mut all_sv: Vec<f64> = Vec::new();
    let mut norms: Vec<f64> = Vec::new();
    for s in subsets(m, k)? {
        let sv = linalg::singular_values(partial_frame(frame, &s)?.entries())?;
        norms.push(sv.iter().sum());
        all_sv.extend(sv);
    }
    let count = norms.len() as f64;
    let energy: f64 = norms.iter().sum();
    let terms = all_sv.len() as f64;
    debug_assert_eq!(all_sv.len(), n.min(k) * norms.len());
    let mean_singular = energy / terms;
    let mean_nuclear = energy / count;
    let sum_sq_singular: f64 = all_sv.iter().map(|s| s * s).sum();
    Ok(NuclearStats {
        k,
        energy,
        sum_sq_singular,
        variance: all_sv.iter().map(|s| (s - mean_singular).powi(2)).sum(),
        variance_identity: sum_sq_singular - energy * energy / terms,
        mean_singular,
        mean_nuclear,
        nuclear_norm_spread: norms.iter().map(|x| (x - mean_nuclear).powi(2)).sum(),
    })
}

/// `NE_k(Φ) = Σ_{|K|=k} ‖Φ_K‖_*`.
pub fn nuclear_energy(frame: &Frame, k: usize) -> Result<f64> {
    Ok(nuclear_stats(frame, k)?.energy)
}

/// Nuclear norms of all k-subsets in lexicographic order.
pub fn nuclear_norms(frame: &Frame, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > frame.n_vecs() {
        return Err(FrameError::InvalidShape(format!(
            "nuclear energy needs 1 <= k <= M, got k={k}"
        )));
    }
    subsets(frame.n_vecs(), k)?.map(|s| nuclear_norm(frame, &s)).collect()
}

/// Closed form of the k-nuclear variance for Parseval frames:
/// `N C(M-1,k-1) - NE_k^2 / (min(N,k) C(M,k))`.
pub fn nuclear_variance_parseval_identity(m: usize, n: usize, k: usize, energy: f64) -> f64 {
    n as f64 * binomial_f64(m - 1, k - 1) - energy * energy / (n.min(k) as f64 * binomial_f64(m, k))
}

/// Spark: size of the smallest linearly dependent subset, or `M + 1` if none.
///
/// Serialized as an integer, or the string `"exceeds cap"` when the frame is
/// too large to search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spark {
    Value(usize),
    ExceedsCap,
}

const EXCEEDS_CAP: &str = "exceeds cap";

impl Serialize for Spark {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Spark::Value(v) => s.serialize_u64(*v as u64),
            Spark::ExceedsCap => s.serialize_str(EXCEEDS_CAP),
        }
    }
}

impl<'de> Deserialize<'de> for Spark {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => n
                .as_u64()
                .map(|v| Spark::Value(v as usize))
                .ok_or_else(|| serde::de::Error::custom("spark must be a nonnegative integer")),
            serde_json::Value::String(s) if s == EXCEEDS_CAP => Ok(Spark::ExceedsCap),
            other => Err(serde::de::Error::custom(format!("invalid spark value {other}"))),
        }
    }
}

fn is_dependent(sv: &[f64], k: usize) -> bool {
    if sv.len() < k {
        return true;
    }
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv[k - 1];
    smin <= EPS_RANK * smax || smax == 0.0
}

pub fn spark(frame: &Frame) -> Result<usize> {
    spark_with_cap(frame, DEFAULT_SPARK_CAP)
}

pub fn spark_with_cap(frame: &Frame, cap: usize) -> Result<usize> {
    let m = frame.n_vecs();
    if m > cap {
        return Err(FrameError::CapExceeded { count: m as u128, cap });
    }
    for k in 1..=m {
        if k > frame.n_dim() {
            return Ok(k);
        }
        for s in subsets(m, k)? {
            let sv = linalg::singular_values(partial_frame(frame, &s)?.entries())?;
            if is_dependent(&sv, k) {
                return Ok(k);
            }
        }
    }
    Ok(m + 1)
}

/// Plücker coordinates `det(Φ_K)` for `|K| = N`, lexicographic order.
pub fn plucker(frame: &Frame) -> Result<Vec<C64>> {
    let (n, m) = (frame.n_dim(), frame.n_vecs());
    if n > m {
        return Err(FrameError::InvalidShape(format!(
            "Plücker coordinates need N <= M, got N={n}, M={m}"
        )));
    }
    subsets(m, n)?
        .map(|s| Ok(linalg::determinant(partial_frame(frame, &s)?.entries())))
        .collect()
}

/// `x12 x34 - x13 x24 + x14 x23` for coordinates ordered (12, 13, 14, 23, 24, 34).
pub fn plucker_relation_42(coords: &[C64]) -> Result<C64> {
    if coords.len() != 6 {
        return Err(FrameError::InvalidShape(format!(
            "Gr(4,2) has 6 Plücker coordinates, got {}",
            coords.len()
        )));
    }
    let [x12, x13, x14, x23, x24, x34] = [coords[0], coords[1], coords[2], coords[3], coords[4], coords[5]];
    Ok(x12 * x34 - x13 * x24 + x14 * x23)
}

/// Largest normalized inner product `max_{i≠j} |<φ_i/‖φ_i‖, φ_j/‖φ_j‖>|`.
pub fn coherence(frame: &Frame) -> Result<f64> {
    let m = frame.n_vecs();
    let norms: Vec<f64> = frame.column_norms_sq().iter().map(|x| x.sqrt()).collect();
    if let Some(i) = norms.iter().position(|&x| x <= 1e-12) {
        return Err(FrameError::ZeroVector(i));
    }
    let g = gram(frame);
    let mut best: f64 = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            best = best.max(g.get(i, j).norm() / (norms[i] * norms[j]));
        }
    }
    Ok(best)
}

/// Welch lower bound `sqrt((M-N) / (N(M-1)))` on the coherence of M unit vectors in F^N.
pub fn welch_bound(m: usize, n: usize) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    ((mf - nf) / (nf * (mf - 1.0))).sqrt()
}

/// Structural diagnostics reported alongside the measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub min_norm: f64,
    pub max_norm: f64,
    pub zero_vectors: usize,
    pub orthogonal_pairs: usize,
    pub parallel_pairs: usize,
    pub orthodecomposable: bool,
}

pub fn diagnostics(frame: &Frame) -> Diagnostics {
    const ZERO: f64 = 1e-10;
    let m = frame.n_vecs();
    let g = gram(frame);
    let norms: Vec<f64> = frame.column_norms_sq().iter().map(|x| x.sqrt()).collect();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let (mut orth, mut par) = (0, 0);
    for i in 0..m {
        for j in i + 1..m {
            let z = g.get(i, j).norm();
            if z <= ZERO {
                orth += 1;
            } else {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
                if (z - norms[i] * norms[j]).abs() <= ZERO * norms[i].max(norms[j]).max(1.0) {
                    par += 1;
                }
            }
        }
    }
    let roots = (0..m).filter(|&i| find(&mut parent, i) == i).count();
    Diagnostics {
        min_norm: norms.iter().copied().fold(f64::INFINITY, f64::min),
        max_norm: norms.iter().copied().fold(0.0, f64::max),
        zero_vectors: norms.iter().filter(|&&x| x <= ZERO).count(),
        orthogonal_pairs: orth,
        parallel_pairs: par,
        orthodecomposable: roots > 1,
    }
}

/// Measures that depend on a subset size `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeasures {
    pub k: usize,
    pub total_volume: Option<f64>,
    pub sum_sq_volume: Option<f64>,
    pub volume_variance: Option<f64>,
    pub min_volume: Option<f64>,
    pub total_comp_volume: Option<f64>,
    pub nuclear_energy: f64,
    pub nuclear_variance: f64,
    pub mean_nuclear: f64,
    pub mean_singular: f64,
    pub sum_sq_singular: f64,
}

/// Every measure, bound and predicate of one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub field: crate::frame::ScalarField,
    pub n: usize,
    pub m: usize,
    pub tc: f64,
    pub ead: Option<f64>,
    pub gram_variance_v: f64,
    pub ad: Option<f64>,
    pub c_phi: f64,
    pub coherence: Option<f64>,
    pub per_k: Vec<KMeasures>,
    pub spark: Spark,
    pub constants: Option<EquiangularConstants>,
    pub predicates: FramePredicates,
    pub diagnostics: Diagnostics,
}

pub const REPORT_SCHEMA: u32 = 1;

pub fn analyze(frame: &Frame, k_list: &[usize]) -> Result<AnalysisReport> {
    let (n, m) = (frame.n_dim(), frame.n_vecs());
    let tc = total_coherence(frame);
    let (v, c_phi) = gram_variance(frame);
    let proper = n < m;
    let mut per_k = Vec::with_capacity(k_list.len());
    for &k in k_list {
        if k == 0 || k > m {
            return Err(FrameError::InvalidShape(format!("k={k} not in 1..={m}")));
        }
        let vol = if k <= n { Some(volume_stats(frame, k)?) } else { None };
        let cv = if k >= n {
            Some(total_comp_volume(frame, k)?)
        } else {
            None
        };
        let ne = nuclear_stats(frame, k)?;
        per_k.push(KMeasures {
            k,
            total_volume: vol.map(|s| s.total),
            sum_sq_volume: vol.map(|s| s.sum_sq),
            volume_variance: vol.map(|s| s.variance),
            min_volume: vol.map(|s| s.min),
            total_comp_volume: cv,
            nuclear_energy: ne.energy,
            nuclear_variance: ne.variance,
            mean_nuclear: ne.mean_nuclear,
            mean_singular: ne.mean_singular,
            sum_sq_singular: ne.sum_sq_singular,
        });
    }
    let spark = match spark(frame) {
        Ok(s) => Spark::Value(s),
        Err(FrameError::CapExceeded { .. }) => Spark::ExceedsCap,
        Err(e) => return Err(e),
    };
    Ok(AnalysisReport {
        schema: REPORT_SCHEMA,
        field: frame.field(),
        n,
        m,
        tc,
        ead: if proper {
            Some(equiangular_distance(frame)?)
        } else {
            None
        },
        gram_variance_v: v,
        ad: if proper { Some(angular_deviation(frame)?) } else { None },
        c_phi,
        coherence: coherence(frame).ok(),
        per_k,
        spark,
        constants: if proper {
            Some(equiangular_constants(m, n, k_list)?)
        } else {
            None
        },
        predicates: predicates(frame, &Tolerances::default())?,
        diagnostics: diagnostics(frame),
    })
}

/// One row of the flat CSV export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatRow {
    pub measure: &'static str,
    pub k: Option<usize>,
    pub value: f64,
    pub bound_lower: Option<f64>,
    pub bound_upper: Option<f64>,
}

impl AnalysisReport {
    /// Flattens the report into `(measure, k, value, bound_lower, bound_upper)` rows.
    pub fn flat_rows(&self) -> Vec<FlatRow> {
        let c = self.constants.as_ref();
        let row = |measure, k, value, lo, hi| FlatRow {
            measure,
            k,
            value,
            bound_lower: lo,
            bound_upper: hi,
        };
        let mut rows = vec![
            row("tc", None, self.tc, c.map(|c| c.tc_lower), c.map(|c| c.tc_upper)),
            row("gram_variance", None, self.gram_variance_v, Some(0.0), None),
            row("c_phi", None, self.c_phi, None, None),
        ];
        if let Some(ead) = self.ead {
            rows.push(row("ead", None, ead, Some(0.0), None));
        }
        if let Some(ad) = self.ad {
            rows.push(row("ad", None, ad, Some(0.0), None));
        }
        if let Some(coh) = self.coherence {
            let welch = (self.n < self.m).then(|| welch_bound(self.m, self.n));
            rows.push(row("coherence", None, coh, welch, Some(1.0)));
        }
        for km in &self.per_k {
            let kc = c.and_then(|c| c.for_k(km.k));
            let k = Some(km.k);
            if let Some(v) = km.total_volume {
                rows.push(row(
                    "total_volume",
                    k,
                    v,
                    kc.and_then(|x| x.vk_lower),
                    kc.and_then(|x| x.vk_upper),
                ));
            }
            if let Some(v) = km.sum_sq_volume {
                rows.push(row("sum_sq_volume", k, v, None, kc.and_then(|x| x.vk_lower)));
            }
            if let Some(v) = km.volume_variance {
                rows.push(row("volume_variance", k, v, Some(0.0), None));
            }
            if let Some(v) = km.min_volume {
                rows.push(row("min_volume", k, v, Some(0.0), kc.and_then(|x| x.c_mnk)));
            }
            if let Some(v) = km.total_comp_volume {
                rows.push(row("total_comp_volume", k, v, Some(0.0), kc.and_then(|x| x.cvk_upper)));
            }
            rows.push(row("nuclear_energy", k, km.nuclear_energy, Some(0.0), None));
            rows.push(row("nuclear_variance", k, km.nuclear_variance, Some(0.0), None));
            rows.push(row("mean_nuclear", k, km.mean_nuclear, None, None));
            rows.push(row("mean_singular", k, km.mean_singular, None, None));
            rows.push(row("sum_sq_singular", k, km.sum_sq_singular, None, None));
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::{mercedes_benz, offset_bases_4_2, onb_padded, random_parseval, simplex_etf, Seed};
    use crate::frame::ScalarField;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn constants_match_closed_forms() {
        let c = equiangular_constants(3, 2, &[1, 2]).unwrap();
        assert!((c.c_mn - 1.0 / 3.0).abs() < 1e-16);
        assert!((c.for_k(2).unwrap().c_mnk.unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((c.for_k(1).unwrap().c_mnk.unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((welch_constant(7, 3) - SQRT2 / 7.0).abs() < 1e-16);
        assert!((welch_constant(7, 3) - 0.2020305).abs() < 1e-7);
        assert!(equiangular_constants(3, 3, &[1]).is_err());
        // v_2^2 = N^2/M^2 - c^2 for an ETF
        let v2 = equal_volume_constant(7, 3, 2);
        assert!((v2 * v2 - (9.0 / 49.0 - welch_constant(7, 3).powi(2))).abs() < 1e-15);
    }

    #[test]
    fn equal_volume_constant_large_m() {
        // C(200,100) overflows f64 factorials but the ratio form is fine
        let c = equal_volume_constant(200, 150, 100);
        assert!(c.is_finite() && c > 0.0);
    }

    #[test]
    fn total_coherence_examples() {
        assert_eq!(total_coherence(&onb_padded(5, 3, ScalarField::Real).unwrap()), 0.0);
        assert!((total_coherence(&mercedes_benz()) - 2.0).abs() < 1e-14);
        assert!((total_coherence(&simplex_etf(3).unwrap()) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ead_and_variance_on_padded_onb() {
        let f = onb_padded(5, 3, ScalarField::Real).unwrap();
        assert!((equiangular_distance(&f).unwrap() - 2.4).abs() < 1e-14);
        assert!((angular_deviation(&f).unwrap() - 1.2).abs() < 1e-14);
        let (v, c_phi) = gram_variance(&f);
        assert!((v - 1.2).abs() < 1e-14);
        assert_eq!(c_phi, 0.0);
        let mb = mercedes_benz();
        assert!(equiangular_distance(&mb).unwrap() < 1e-28);
        assert!(angular_deviation(&mb).unwrap() < 1e-28);
        let (v, c_phi) = gram_variance(&mb);
        assert!(v < 1e-28 && (c_phi - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn volumes_on_reference_frames() {
        let mb = mercedes_benz();
        for s in subsets(3, 2).unwrap() {
            assert!((volume(&mb, &s).unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        }
        let st = volume_stats(&mb, 2).unwrap();
        assert!((st.total - 3f64.sqrt()).abs() < 1e-14);
        assert!((st.sum_sq - 1.0).abs() < 1e-14);
        assert!(st.variance < 1e-28);

        let f = offset_bases_4_2();
        let st = volume_stats(&f, 2).unwrap();
        assert!((st.total - (1.0 + SQRT2)).abs() < 1e-14);
        assert!((st.variance - (1.0 - (1.0 + SQRT2).powi(2) / 6.0)).abs() < 1e-14);
        assert!((st.variance - 0.0285955).abs() < 1e-7);
        let first = SubsetSelector::new(4, vec![0, 1]).unwrap();
        assert!((volume(&f, &first).unwrap() - SQRT2 / 4.0).abs() < 1e-15);

        let p = onb_padded(5, 3, ScalarField::Real).unwrap();
        let st = volume_stats(&p, 2).unwrap();
        assert!((st.total - 3.0).abs() < 1e-15);
        assert!((st.variance - 2.1).abs() < 1e-14);
    }

    #[test]
    fn collinear_pair_has_zero_volume() {
        let f = Frame::from_real_rows(2, 2, &[1.0, 2.0, 0.5, 1.0]).unwrap();
        assert_eq!(volume(&f, &SubsetSelector::full(2)).unwrap(), 0.0);
        assert!(volume(&f, &SubsetSelector::new(2, vec![0]).unwrap()).is_ok());
        let mb = mercedes_benz();
        assert!(matches!(
            volume(&mb, &SubsetSelector::full(3)),
            Err(FrameError::InvalidShape(_))
        ));
    }

    #[test]
    fn comp_volumes() {
        let mb = mercedes_benz();
        assert!((comp_volume(&mb, &SubsetSelector::full(3)).unwrap() - 1.0).abs() < 1e-14);
        let pair = SubsetSelector::new(3, vec![0, 1]).unwrap();
        assert!((comp_volume(&mb, &pair).unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(comp_volume(&mb, &SubsetSelector::new(3, vec![0]).unwrap()).is_err());
        let f = offset_bases_4_2();
        let sq: f64 = super::comp_volumes(&f, 3).unwrap().iter().map(|x| x * x).sum();
        assert!((sq - 2.0).abs() < 1e-14);
    }

    #[test]
    fn nuclear_energy_examples() {
        // independent route: σ from the trace and determinant of each 2x2 Gram block
        let mb = mercedes_benz();
        let (tr, det) = (4.0f64 / 3.0, 1.0f64 / 3.0);
        let disc = (tr * tr - 4.0 * det).sqrt();
        let (l1, l2) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
        let pair_norm = l1.sqrt() + l2.sqrt();
        assert!((pair_norm - (tr + 2.0 * det.sqrt()).sqrt()).abs() < 1e-15);
        assert!((pair_norm - 1.5773503).abs() < 1e-7);
        let st = nuclear_stats(&mb, 2).unwrap();
        assert!((st.energy - 3.0 * pair_norm).abs() < 1e-13);
        assert!((st.energy - 4.7320508).abs() < 1e-7);

        let ne1 = nuclear_energy(&mb, 1).unwrap();
        assert!((ne1 - 3.0 * (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((nuclear_energy(&mb, 3).unwrap() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn nuclear_variance_routes_agree() {
        for (m, n) in [(5, 2), (6, 3), (7, 4)] {
            let f = random_parseval(m, n, ScalarField::Complex, Seed(m as u64 * 10 + n as u64)).unwrap();
            for k in 1..=m {
                let st = nuclear_stats(&f, k).unwrap();
                assert!((st.variance - st.variance_identity).abs() < 1e-8);
                let closed = nuclear_variance_parseval_identity(m, n, k, st.energy);
                assert!((st.variance - closed).abs() < 1e-8, "m={m} n={n} k={k}");
                assert!((st.mean_nuclear - st.energy / binomial_f64(m, k)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spark_examples() {
        assert_eq!(spark(&onb_padded(3, 3, ScalarField::Real).unwrap()).unwrap(), 4);
        assert_eq!(spark(&onb_padded(4, 3, ScalarField::Real).unwrap()).unwrap(), 1);
        assert_eq!(spark(&mercedes_benz()).unwrap(), 3);
        let f = onb_padded(21, 1, ScalarField::Real).unwrap();
        assert!(matches!(spark(&f), Err(FrameError::CapExceeded { .. })));
        let dup = Frame::from_real_rows(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(spark(&dup).unwrap(), 2);
    }

    #[test]
    fn plucker_of_offset_bases() {
        let coords = plucker(&offset_bases_4_2()).unwrap();
        let expected = [SQRT2 / 4.0, 0.5, SQRT2 / 4.0, SQRT2 / 4.0, 0.5, SQRT2 / 4.0];
        for (z, e) in coords.iter().zip(expected) {
            assert!((z.re - e).abs() < 1e-15 && z.im == 0.0);
        }
        assert!(plucker_relation_42(&coords).unwrap().norm() < 1e-15);
        assert!(plucker_relation_42(&coords[..5]).is_err());
    }

    #[test]
    fn coherence_examples() {
        assert_eq!(coherence(&onb_padded(3, 3, ScalarField::Real).unwrap()).unwrap(), 0.0);
        let s = simplex_etf(3).unwrap();
        assert!((coherence(&s).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((welch_bound(4, 3) - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            coherence(&onb_padded(4, 3, ScalarField::Real).unwrap()),
            Err(FrameError::ZeroVector(3))
        ));
    }

    #[test]
    fn diagnostics_detect_structure() {
        let d = diagnostics(&onb_padded(4, 2, ScalarField::Real).unwrap());
        assert_eq!(d.zero_vectors, 2);
        assert!(d.orthodecomposable);
        let d = diagnostics(&mercedes_benz());
        assert!(!d.orthodecomposable);
        assert_eq!((d.orthogonal_pairs, d.parallel_pairs), (0, 0));
        let dup = Frame::from_real_rows(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(diagnostics(&dup).parallel_pairs, 1);
    }

    #[test]
    fn analyze_report_shape() {
        let r = analyze(&offset_bases_4_2(), &[1, 2, 3]).unwrap();
        assert_eq!(r.per_k.len(), 3);
        assert!((r.per_k[1].total_volume.unwrap() - (1.0 + SQRT2)).abs() < 1e-14);
        assert!(r.per_k[2].total_volume.is_none());
        assert!(r.per_k[0].total_comp_volume.is_none());
        assert!(r.per_k[1].total_comp_volume.is_some());
        assert!(r.predicates.is_parseval);
        let rows = r.flat_rows();
        assert!(rows.iter().any(|x| x.measure == "total_volume" && x.k == Some(2)));
        let json = serde_json::to_string(&r).unwrap();
        let back: AnalysisReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.spark, r.spark);
    }
}
