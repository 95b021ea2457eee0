//! Frames, Gram matrices, subset selection and structural predicates.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::linalg::{self, binomial, CMatrix, C64, EPS_RANK};

/// Default upper bound on the number of subsets a combinatorial sum may visit.
pub const DEFAULT_SUBSET_CAP: usize = 2_000_000;

static SUBSET_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_SUBSET_CAP);

/// Current subset cap, shared by every combinatorial sum in the crate.
pub fn subset_cap() -> usize {
    SUBSET_CAP.load(Ordering::Relaxed)
}

pub fn set_subset_cap(cap: usize) {
    SUBSET_CAP.store(cap.max(1), Ordering::Relaxed);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarField {
    Real,
    Complex,
}

impl std::fmt::Display for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalarField::Real => f.write_str("real"),
            ScalarField::Complex => f.write_str("complex"),
        }
    }
}

impl std::str::FromStr for ScalarField {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(ScalarField::Real),
            "complex" => Ok(ScalarField::Complex),
            other => Err(FrameError::Parse(format!("unknown field `{other}`"))),
        }
    }
}

/// An `N x M` matrix whose columns are the frame vectors.
///
/// Entries are finite; a `Real` frame has identically zero imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    field: ScalarField,
    entries: CMatrix,
}

impl Frame {
    pub fn new(field: ScalarField, entries: CMatrix) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(FrameError::InvalidShape(format!(
                "frame must be at least 1x1, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        for c in 0..entries.ncols() {
            for r in 0..entries.nrows() {
                let z = entries[(r, c)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(FrameError::NonFinite { row: r, col: c });
                }
                if field == ScalarField::Real && z.im != 0.0 {
                    return Err(FrameError::ImaginaryInRealFrame { row: r, col: c });
                }
            }
        }
        Ok(Frame { field, entries })
    }

    pub fn from_real(entries: &nalgebra::DMatrix<f64>) -> Result<Self> {
        Frame::new(ScalarField::Real, linalg::complexify(entries))
    }

    /// Real frame from row-major data.
    pub fn from_real_rows(n: usize, m: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * m {
            return Err(FrameError::InvalidShape(format!(
                "expected {} entries, got {}",
                n * m,
                data.len()
            )));
        }
        Frame::from_real(&nalgebra::DMatrix::from_row_slice(n, m, data))
    }

    pub fn field(&self) -> ScalarField {
        self.field
    }

    /// Ambient dimension `N`.
    pub fn n_dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of vectors `M`.
    pub fn n_vecs(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn column(&self, i: usize) -> nalgebra::DVector<C64> {
        self.entries.column(i).into_owned()
    }

    pub fn column_norm_sq(&self, i: usize) -> f64 {
        self.entries.column(i).iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn column_norms_sq(&self) -> Vec<f64> {
        (0..self.n_vecs()).map(|i| self.column_norm_sq(i)).collect()
    }

    /// Frame operator `ΦΦ*` (N x N, Hermitian).
    pub fn frame_operator(&self) -> GramMatrix {
        GramMatrix::from_raw(&self.entries * self.entries.adjoint())
    }

    /// Applies `A` on the left: `AΦ`.
    pub fn left_mul(&self, a: &CMatrix) -> Result<Frame> {
        if a.ncols() != self.n_dim() {
            return Err(FrameError::InvalidShape("left factor has wrong width".into()));
        }
        let field = if linalg::is_real(a) {
            self.field
        } else {
            ScalarField::Complex
        };
        Frame::new(field, a * &self.entries)
    }

    /// Appends zero columns.
    pub fn pad_zeros(&self, extra: usize) -> Frame {
        let n = self.n_dim();
        let m = self.n_vecs();
        let entries = CMatrix::from_fn(n, m + extra, |r, c| {
            if c < m {
                self.entries[(r, c)]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Frame {
            field: self.field,
            entries,
        }
    }

    /// Reorders columns; `order[j]` is the source column of output column `j`.
    pub fn permute_columns(&self, order: &[usize]) -> Result<Frame> {
        let m = self.n_vecs();
        let mut seen = vec![false; m];
        if order.len() != m {
            return Err(FrameError::InvalidShape("permutation has wrong length".into()));
        }
        for &i in order {
            if i >= m || seen[i] {
                return Err(FrameError::InvalidShape("not a permutation".into()));
            }
            seen[i] = true;
        }
        let entries = CMatrix::from_fn(self.n_dim(), m, |r, c| self.entries[(r, order[c])]);
        Ok(Frame {
            field: self.field,
            entries,
        })
    }
}

/// A Hermitian matrix produced from a frame (Gram matrix or frame operator).
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: CMatrix,
}

impl GramMatrix {
    /// Symmetrizes `(G + G*) / 2`.
    pub fn from_raw(raw: CMatrix) -> Self {
        GramMatrix {
            entries: linalg::hermitian_part(&raw),
        }
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.size()).map(|i| self.entries[(i, i)].re).sum()
    }

    /// Principal submatrix indexed by `k_set`.
    pub fn principal(&self, k_set: &SubsetSelector) -> CMatrix {
        let idx = k_set.indices();
        CMatrix::from_fn(idx.len(), idx.len(), |r, c| self.entries[(idx[r], idx[c])])
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(linalg::hermitian_eigen(&self.entries)?.0)
    }
}

/// `Φ*Φ`, symmetrized.
pub fn gram(frame: &Frame) -> GramMatrix {
    GramMatrix::from_raw(frame.entries.adjoint() * &frame.entries)
}

/// An increasing subset `K` of the 0-based index set `{0, .., m-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubsetSelector {
    m: usize,
    indices: Vec<usize>,
}

impl SubsetSelector {
    pub fn new(m: usize, indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() || indices.len() > m {
            return Err(FrameError::InvalidShape(format!(
                "subset size {} not in 1..={m}",
                indices.len()
            )));
        }
        for w in indices.windows(2) {
            if w[0] >= w[1] {
                return Err(FrameError::InvalidShape(
                    "subset indices must be strictly increasing".into(),
                ));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= m {
                return Err(FrameError::IndexOutOfRange { index: last, m });
            }
        }
        Ok(SubsetSelector { m, indices })
    }

    /// The full index set `{0, .., m-1}`.
    pub fn full(m: usize) -> Self {
        SubsetSelector {
            m,
            indices: (0..m).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Sorted complement `K^c`; empty when `K` is everything.
    pub fn complement(&self) -> Vec<usize> {
        (0..self.m).filter(|i| !self.contains(*i)).collect()
    }

    pub fn complement_selector(&self) -> Option<SubsetSelector> {
        let c = self.complement();
        if c.is_empty() {
            None
        } else {
            Some(SubsetSelector { m: self.m, indices: c })
        }
    }
}

/// Columns of `frame` indexed by `k_set`, in index order.
pub fn partial_frame(frame: &Frame, k_set: &SubsetSelector) -> Result<Frame> {
    if k_set.m() != frame.n_vecs() {
        return Err(FrameError::InvalidShape(format!(
            "selector over {} vectors applied to frame with {}",
            k_set.m(),
            frame.n_vecs()
        )));
    }
    let idx = k_set.indices();
    let entries = CMatrix::from_fn(frame.n_dim(), idx.len(), |r, c| frame.entries[(r, idx[c])]);
    Ok(Frame {
        field: frame.field,
        entries,
    })
}

/// Singular values of the frame matrix in decreasing order.
pub fn singular_values(frame: &Frame) -> Result<Vec<f64>> {
    linalg::singular_values(frame.entries())
}

/// Lexicographic enumeration of all `k`-subsets of `{0, .., m-1}`.
#[derive(Debug, Clone)]
pub struct Subsets {
    m: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for Subsets {
    type Item = SubsetSelector;

    fn next(&mut self) -> Option<SubsetSelector> {
        let cur = self.current.as_mut()?;
        let out = SubsetSelector {
            m: self.m,
            indices: cur.clone(),
        };
        let k = cur.len();
        // advance to the next combination in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if cur[i] < self.m - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// All `C(m, k)` subsets, erroring if the count exceeds the configured cap.
pub fn subsets(m: usize, k: usize) -> Result<Subsets> {
    subsets_with_cap(m, k, subset_cap())
}

pub fn subsets_with_cap(m: usize, k: usize, cap: usize) -> Result<Subsets> {
    if k == 0 || k > m {
        return Err(FrameError::InvalidShape(format!("subset size {k} not in 1..={m}")));
    }
    let count = binomial(m, k);
    if count > cap as u128 {
        return Err(FrameError::CapExceeded { count, cap });
    }
    Ok(Subsets {
        m,
        current: Some((0..k).collect()),
    })
}

/// Tolerances used by [`predicates`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub parseval: f64,
    pub norm: f64,
    pub angle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            parseval: 1e-10,
            norm: 1e-10,
            angle: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramePredicates {
    pub is_frame: bool,
    pub is_parseval: bool,
    pub is_equal_norm: bool,
    pub is_equiangular: bool,
    pub rank: usize,
    pub residuals: BTreeMap<String, f64>,
}

/// `c_{M,N} = sqrt(N(M-N) / (M^2 (M-1)))`, the common inner-product magnitude of an
/// equiangular Parseval frame.
pub fn welch_constant(m: usize, n: usize) -> f64 {
    let (m, n) = (m as f64, n as f64);
    (n * (m - n) / (m * m * (m - 1.0))).sqrt()
}

/// Numerical rank with threshold `EPS_RANK * σ_max`.
pub fn numerical_rank(frame: &Frame) -> Result<usize> {
    let sv = singular_values(frame)?;
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > EPS_RANK * smax).count())
}

pub fn predicates(frame: &Frame, tol: &Tolerances) -> Result<FramePredicates> {
    let n = frame.n_dim();
    let m = frame.n_vecs();
    let rank = numerical_rank(frame)?;
    let op = frame.frame_operator();
    let parseval_res = linalg::frobenius(&(op.entries() - CMatrix::identity(n, n)));
    let target = n as f64 / m as f64;
    let norms = frame.column_norms_sq();
    let norm_res = norms.iter().map(|x| (x - target).abs()).fold(0.0, f64::max);

    let is_parseval = parseval_res <= tol.parseval;
    let is_equal_norm = norm_res <= tol.norm;

    let mut residuals = BTreeMap::new();
    residuals.insert("parseval".to_string(), parseval_res);
    residuals.insert("equal_norm".to_string(), norm_res);

    let mut is_equiangular = false;
    if m > n && m >= 2 {
        let g = gram(frame);
        let c = welch_constant(m, n);
        let mut angle_res: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    angle_res = angle_res.max((g.get(i, j).norm() - c).abs());
                }
            }
        }
        residuals.insert("equiangular".to_string(), angle_res);
        is_equiangular = is_parseval && is_equal_norm && angle_res <= tol.angle;
    }

    Ok(FramePredicates {
        is_frame: rank == n,
        is_parseval,
        is_equal_norm,
        is_equiangular,
        rank,
        residuals,
    })
}
