//! Dense linear algebra over complex matrices.
//!
//! Every frame is stored as a `DMatrix<Complex<f64>>`. Matrices whose
//! imaginary parts are all exactly zero are routed through the real
//! decompositions, so real inputs produce real outputs bit-for-bit.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use crate::error::{FrameError, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Default relative threshold for numerical rank decisions.
pub const EPS_RANK: f64 = 1e-12;

pub(crate) fn is_real(a: &CMatrix) -> bool {
    a.iter().all(|z| z.im == 0.0)
}

pub(crate) fn real_part(a: &CMatrix) -> DMatrix<f64> {
    a.map(|z| z.re)
}

pub(crate) fn complexify(a: &DMatrix<f64>) -> CMatrix {
    a.map(|x| C64::new(x, 0.0))
}

/// `(A + A*) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues are returned in ascending order with matching eigenvector
/// columns.
pub fn hermitian_eigen(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(FrameError::InvalidShape(format!(
            "eigen-decomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let (values, vectors) = if is_real(a) {
        let eig = SymmetricEigen::try_new(real_part(a), f64::EPSILON, 0)
            .ok_or_else(|| FrameError::NumericalFailure("symmetric eigen did not converge".into()))?;
        (
            eig.eigenvalues.iter().copied().collect::<Vec<_>>(),
            complexify(&eig.eigenvectors),
        )
    } else {
        let eig = SymmetricEigen::try_new(a.clone(), f64::EPSILON, 0)
            .ok_or_else(|| FrameError::NumericalFailure("hermitian eigen did not converge".into()))?;
        (eig.eigenvalues.iter().copied().collect::<Vec<_>>(), eig.eigenvectors)
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(FrameError::NumericalFailure("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = CMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Ok((sorted_values, sorted_vectors))
}

/// Singular values in decreasing order; length `min(rows, cols)`.
pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let mut values: Vec<f64> = if is_real(a) {
        let svd = nalgebra::linalg::SVD::try_new(real_part(a), false, false, f64::EPSILON, 0)
            .ok_or_else(|| FrameError::NumericalFailure("SVD did not converge".into()))?;
        svd.singular_values.iter().copied().collect()
    } else {
        let svd = nalgebra::linalg::SVD::try_new(a.clone(), false, false, f64::EPSILON, 0)
            .ok_or_else(|| FrameError::NumericalFailure("SVD did not converge".into()))?;
        svd.singular_values.iter().copied().collect()
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(FrameError::NumericalFailure("non-finite singular value".into()));
    }
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Determinant via LU.
pub fn determinant(a: &CMatrix) -> C64 {
    if a.nrows() == 0 {
        return C64::new(1.0, 0.0);
    }
    if is_real(a) {
        C64::new(real_part(a).determinant(), 0.0)
    } else {
        a.clone().determinant()
    }
}

/// Determinant of a Hermitian PSD matrix, as a real number.
pub(crate) fn hermitian_det(a: &CMatrix) -> f64 {
    determinant(a).re
}

/// `A^{-1/2}` for a Hermitian positive definite matrix.
pub fn inv_sqrt_psd(a: &CMatrix) -> Result<CMatrix> {
    inv_sqrt_psd_with(a, EPS_RANK)
}

pub fn inv_sqrt_psd_with(a: &CMatrix, eps: f64) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen(&hermitian_part(a))?;
    if let Some(&smallest) = values.first() {
        if smallest <= eps {
            return Err(FrameError::SingularMatrix(smallest));
        }
    }
    Ok(spectral_map(&values, &vectors, |lambda| 1.0 / lambda.sqrt()))
}

/// `V f(Λ) V*` for a Hermitian eigen-decomposition.
pub(crate) fn spectral_map(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = values.len();
    let mut scaled = vectors.clone();
    for (c, &lambda) in values.iter().enumerate() {
        let s = f(lambda);
        for r in 0..n {
            scaled[(r, c)] *= s;
        }
    }
    let out = scaled * vectors.adjoint();
    hermitian_part(&out)
}

/// Frobenius norm of a complex matrix.
pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Binomial coefficient `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        // acc * (n - j) / (j + 1) stays exact because acc = C(n, j) here
        acc = match acc.checked_mul((n - j) as u128) {
            Some(v) => v / (j as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

pub(crate) fn binomial_f64(n: usize, k: usize) -> f64 {
    binomial(n, k) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> CMatrix {
        let n = values.len();
        CMatrix::from_fn(n, n, |r, c| {
            if r == c {
                C64::new(values[r], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn inv_sqrt_of_diagonal_and_scalar() {
        let s = inv_sqrt_psd(&diag(&[4.0, 1.0])).unwrap();
        assert!((s[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((s[(1, 1)].re - 1.0).abs() < 1e-15);
        assert!(s[(0, 1)].norm() < 1e-15);

        let s = inv_sqrt_psd(&diag(&[2.0, 2.0])).unwrap();
        assert!((s[(0, 0)].re - 1.0 / 2f64.sqrt()).abs() < 1e-15);

        let s = inv_sqrt_psd(&CMatrix::identity(3, 3)).unwrap();
        assert!(frobenius(&(s - CMatrix::identity(3, 3))) < 1e-15);
    }

    #[test]
    fn inv_sqrt_rejects_singular() {
        assert!(matches!(
            inv_sqrt_psd(&diag(&[1.0, 0.0])),
            Err(FrameError::SingularMatrix(_))
        ));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(20, 10), 184_756);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(60, 30), 118_264_581_564_861_424);
    }

    #[test]
    fn singular_values_sorted() {
        let a = diag(&[1.0, 3.0, 2.0]);
        assert_eq!(singular_values(&a).unwrap(), vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn complex_hermitian_eigen() {
        let a = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(2.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, -1.0),
                C64::new(2.0, 0.0),
            ],
        );
        let (vals, vecs) = hermitian_eigen(&a).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        let rebuilt = spectral_map(&vals, &vecs, |x| x);
        assert!(frobenius(&(rebuilt - a)) < 1e-14);
    }
}
