//! Dense Hermitian linear-algebra helpers shared across modules.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::Result;

pub(crate) type CMatrix = Array2<Complex64>;

pub(crate) fn identity(dim: usize) -> CMatrix {
    Array2::eye(dim)
}

pub(crate) fn adjoint(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

/// Largest elementwise deviation from Hermiticity, `max |M - M^H|`.
pub(crate) fn hermitian_deviation(m: &CMatrix) -> f64 {
    let adj = adjoint(m);
    (m - &adj)
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
}

/// `(M + M^H)/2`, exact Hermitian part.
pub(crate) fn hermitize(m: &CMatrix) -> CMatrix {
    (m + &adjoint(m)) * Complex64::new(0.5, 0.0)
}

pub(crate) fn trace(m: &CMatrix) -> Complex64 {
    m.diag().sum()
}

pub(crate) fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// matrix whose columns are the corresponding orthonormal eigenvectors.
///
/// LAPACK reads the row-major buffer as its transpose, which for a Hermitian
/// matrix is the complex conjugate, so the columns it hands back are the
/// conjugated eigenvectors; they are conjugated once more here.
pub(crate) fn eigh(m: &CMatrix) -> Result<(Array1<f64>, CMatrix)> {
    if m.is_standard_layout() {
        let (vals, vecs) = m.eigh(UPLO::Lower)?;
        Ok((vals, vecs.mapv(|z| z.conj())))
    } else {
        let copy = m.as_standard_layout().to_owned();
        let (vals, vecs) = copy.eigh(UPLO::Lower)?;
        Ok((vals, vecs.mapv(|z| z.conj())))
    }
}

/// Eigendecomposition of a real symmetric matrix: ascending eigenvalues and
/// the matrix whose columns are the corresponding orthonormal eigenvectors.
pub(crate) fn eigh_real(m: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let copy = if m.is_standard_layout() {
        m.clone()
    } else {
        m.as_standard_layout().to_owned()
    };
    let (vals, vecs) = copy.eigh(UPLO::Lower)?;
    Ok((vals, vecs))
}

/// Rebuilds `U f(w) U^H` from an eigendecomposition, re-Hermitized to kill
/// round-off in the off-diagonal parts.
pub(crate) fn from_spectrum(vals: &Array1<f64>, vecs: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let mut scaled = vecs.clone();
    for (j, mut col) in scaled.columns_mut().into_iter().enumerate() {
        let factor = Complex64::new(f(vals[j]), 0.0);
        col.mapv_inplace(|z| z * factor);
    }
    hermitize(&scaled.dot(&adjoint(vecs)))
}

/// Forward substitution: solves `L x = b` for lower-triangular `L`.
pub(crate) fn solve_lower(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = b.len();
    let mut x = Array1::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for j in 0..i {
            s -= l[[i, j]] * x[j];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Back substitution: solves `L^T x = b` for lower-triangular `L`.
pub(crate) fn solve_lower_transpose(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = b.len();
    let mut x = Array1::zeros(n);
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in (i + 1)..n {
            s -= l[[j, i]] * x[j];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Columnwise forward substitution: `L X = B`.
pub(crate) fn solve_lower_matrix(l: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (n, cols) = b.dim();
    let mut x = Array2::zeros((n, cols));
    for c in 0..cols {
        let col = solve_lower(l, &b.column(c).to_owned());
        x.column_mut(c).assign(&col);
    }
    x
}
