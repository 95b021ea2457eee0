//! Reference frames, seeded random frames, Naimark complements and the
//! zero-splitting transform.
//!
//! Randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng::seed_from_u64`),
//! a counter-based stream cipher generator, turned into standard normals
//! with the Box–Muller transform. A seed therefore pins every sample.

use std::f64::consts::{PI, SQRT_2};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::frame::{gram, predicates, Frame, ScalarField, SubsetSelector, Tolerances};
use crate::linalg::{self, CMatrix, C64};

/// Maximum number of Gaussian redraws when a draw is rank deficient.
const MAX_DRAWS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed(pub u64);

/// Standard normal stream (Box–Muller over ChaCha20).
pub struct GaussianStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: Seed) -> Self {
        GaussianStream {
            rng: ChaCha20Rng::seed_from_u64(seed.0),
            spare: None,
        }
    }

    /// Uniform on (0, 1].
    fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Standard normal in the given field; complex draws have `E|z|^2 = 1`.
    pub fn next_scalar(&mut self, field: ScalarField) -> C64 {
        match field {
            ScalarField::Real => C64::new(self.next_normal(), 0.0),
            ScalarField::Complex => {
                let re = self.next_normal();
                let im = self.next_normal();
                C64::new(re, im) / SQRT_2
            }
        }
    }

    pub fn matrix(&mut self, rows: usize, cols: usize, field: ScalarField) -> CMatrix {
        // column-major fill so the stream order matches the storage order
        let mut out = CMatrix::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                out[(r, c)] = self.next_scalar(field);
            }
        }
        out
    }
}

/// The Mercedes–Benz frame: three unit-angle-spaced vectors in R^2 with norm^2 = 2/3.
pub fn mercedes_benz() -> Frame {
    let a = 6f64.sqrt() / 3.0;
    let b = 6f64.sqrt() / 6.0;
    let c = SQRT_2 / 2.0;
    Frame::from_real_rows(2, 3, &[a, -b, -b, 0.0, c, -c]).expect("static shape")
}

/// Standard basis of F^n followed by `m - n` zero vectors.
pub fn onb_padded(m: usize, n: usize, field: ScalarField) -> Result<Frame> {
    if n == 0 || n > m {
        return Err(FrameError::InvalidShape(format!(
            "onb_padded needs 1 <= n <= m, got m={m}, n={n}"
        )));
    }
    let entries = CMatrix::from_fn(
        n,
        m,
        |r, c| if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) },
    );
    Frame::new(field, entries)
}

/// Equiangular Parseval frame of `n + 1` vectors in R^n.
///
/// Built as the Naimark complement of the one-dimensional frame whose
/// entries are all `1/sqrt(n+1)`.
pub fn simplex_etf(n: usize) -> Result<Frame> {
    if n == 0 {
        return Err(FrameError::InvalidShape("simplex_etf needs n >= 1".into()));
    }
    let m = n + 1;
    let line = Frame::from_real(&nalgebra::DMatrix::from_element(1, m, 1.0 / (m as f64).sqrt()))?;
    naimark_complement(&line)
}

/// Harmonic frame: rows `s` of the `m`-point DFT, `φ_j[t] = exp(2πi s_t j / m) / sqrt(m)`.
pub fn harmonic_frame(m: usize, rows: &SubsetSelector) -> Result<Frame> {
    if rows.m() != m {
        return Err(FrameError::InvalidShape(format!(
            "row set indexes {} elements, expected {m}",
            rows.m()
        )));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let idx = rows.indices();
    let entries = CMatrix::from_fn(idx.len(), m, |t, j| {
        // reduce s*j mod m before scaling so the angle stays exact for integers
        let phase = 2.0 * PI * ((idx[t] * j) % m) as f64 / m as f64;
        C64::from_polar(scale, phase)
    });
    Frame::new(ScalarField::Complex, entries)
}

/// The real Parseval frame of two orthonormal bases scaled by `1/sqrt(2)`
/// and offset by 45 degrees; maximizes the total 2-volume over real P(4,2).
pub fn offset_bases_4_2() -> Frame {
    let h = 0.5;
    let r = SQRT_2 / 2.0;
    Frame::from_real_rows(2, 4, &[h, 0.0, -h, -r, h, r, h, 0.0]).expect("static shape")
}

/// Canonical Naimark complement `Ψ` with `Ψ*Ψ = I - Φ*Φ`.
///
/// Rows of `Ψ` are the conjugated unit eigenvectors of `I - Φ*Φ` whose eigenvalue
/// exceeds 1/2, each rotated so that its largest-magnitude entry is real positive.
pub fn naimark_complement(frame: &Frame) -> Result<Frame> {
    naimark_complement_with(frame, &Tolerances::default())
}

pub fn naimark_complement_with(frame: &Frame, tol: &Tolerances) -> Result<Frame> {
    let n = frame.n_dim();
    let m = frame.n_vecs();
    if n >= m {
        return Err(FrameError::InvalidShape(format!(
            "Naimark complement needs N < M, got N={n}, M={m}"
        )));
    }
    let preds = predicates(frame, tol)?;
    if !preds.is_parseval {
        return Err(FrameError::NotParseval(preds.residuals["parseval"]));
    }
    let projector = CMatrix::identity(m, m) - gram(frame).entries();
    let (values, vectors) = linalg::hermitian_eigen(&linalg::hermitian_part(&projector))?;
    let keep: Vec<usize> = (0..m).filter(|&i| values[i] > 0.5).collect();
    if keep.len() != m - n {
        return Err(FrameError::RankMismatch {
            expected: m - n,
            found: keep.len(),
        });
    }
    let mut entries = CMatrix::zeros(m - n, m);
    for (row, &col) in keep.iter().enumerate() {
        let v = vectors.column(col);
        let max_mag = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let pivot = v.iter().position(|z| z.norm() >= max_mag * (1.0 - 1e-12)).unwrap_or(0);
        let phase = v[pivot].conj() / v[pivot].norm();
        for j in 0..m {
            let mut z = (v[j] * phase).conj();
            if j == pivot {
                z = C64::new(z.re, 0.0);
            }
            entries[(row, j)] = z;
        }
    }
    Frame::new(frame.field(), entries)
}

/// Random Parseval frame: Gaussian `G`, retracted to `(GG*)^{-1/2} G`.
pub fn random_parseval(m: usize, n: usize, field: ScalarField, seed: Seed) -> Result<Frame> {
    if n == 0 || n > m {
        return Err(FrameError::InvalidShape(format!(
            "random_parseval needs 1 <= n <= m, got m={m}, n={n}"
        )));
    }
    let mut stream = GaussianStream::new(seed);
    let mut last_err = None;
    for _ in 0..MAX_DRAWS {
        let g = stream.matrix(n, m, field);
        let op = &g * g.adjoint();
        match linalg::inv_sqrt_psd(&op) {
            Ok(s) => return Frame::new(field, clean_field(field, s * g)),
            Err(e) => last_err = Some(e),
        }
    }
    Err(FrameError::NumericalFailure(format!(
        "rank-deficient Gaussian draw after {MAX_DRAWS} attempts: {}",
        last_err.map(|e| e.to_string()).unwrap_or_default()
    )))
}

/// Random frame with columns uniform on the sphere of radius `sqrt(N/M)`.
pub fn random_equal_norm(m: usize, n: usize, field: ScalarField, seed: Seed) -> Result<Frame> {
    if n == 0 || m == 0 {
        return Err(FrameError::InvalidShape("random_equal_norm needs m, n >= 1".into()));
    }
    let mut stream = GaussianStream::new(seed);
    let radius = (n as f64 / m as f64).sqrt();
    let mut entries = CMatrix::zeros(n, m);
    for c in 0..m {
        loop {
            let col: Vec<C64> = (0..n).map(|_| stream.next_scalar(field)).collect();
            let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-300 {
                for (r, z) in col.into_iter().enumerate() {
                    entries[(r, c)] = z * (radius / norm);
                }
                break;
            }
        }
    }
    Frame::new(field, entries)
}

/// Index of the column that [`split_zero`] duplicates.
pub fn split_source_index(frame: &Frame) -> Result<usize> {
    let m = frame.n_vecs();
    if m < 2 || frame.column_norm_sq(m - 1) > 1e-24 {
        return Err(FrameError::PreconditionFailed("last column must be zero".into()));
    }
    (0..m - 1)
        .rev()
        .find(|&i| frame.column_norm_sq(i) > 1e-24)
        .ok_or_else(|| FrameError::PreconditionFailed("no nonzero column to split".into()))
}

/// Replaces the trailing zero vector and the last nonzero vector `ψ` by two copies of `ψ/sqrt(2)`.
///
/// The frame operator is unchanged, so Parseval frames stay Parseval, and total
/// coherence strictly increases.
pub fn split_zero(frame: &Frame) -> Result<Frame> {
    let preds = predicates(frame, &Tolerances::default())?;
    if !preds.is_parseval {
        return Err(FrameError::NotParseval(preds.residuals["parseval"]));
    }
    let src = split_source_index(frame)?;
    let m = frame.n_vecs();
    let mut entries = frame.entries().clone();
    for r in 0..frame.n_dim() {
        let z = frame.entries()[(r, src)] / SQRT_2;
        entries[(r, src)] = z;
        entries[(r, m - 1)] = z;
    }
    Frame::new(frame.field(), entries)
}

fn clean_field(field: ScalarField, mut a: CMatrix) -> CMatrix {
    if field == ScalarField::Real {
        a.iter_mut().for_each(|z| z.im = 0.0);
    }
    a
}
