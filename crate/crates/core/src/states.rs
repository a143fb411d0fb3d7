//! Hermitian operator algebra: density matrices, observable bases,
//! expectations, matrix functions, and relative entropy.
//!
//! Conventions used throughout the crate:
//!
//! - Observable bases are traceless and Hilbert-Schmidt orthonormal with the
//!   Pauli normalization `Tr[F_a F_b] = 2 δ_ab` ([`BASIS_NORMALIZATION`]), so
//!   the qubit closed forms need no rescaling.
//! - A state counts as full-rank when its smallest eigenvalue exceeds
//!   [`RANK_FLOOR`]; operations that need a matrix logarithm refuse boundary
//!   states explicitly instead of regularizing behind the caller's back.
//! - Construction clamps eigenvalues in `[-1e-10, 0)` to zero (tomographic
//!   round-off) and renormalizes; anything more negative is rejected.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMatrix};
use crate::{Error, Result};

/// Hilbert-Schmidt normalization of observable bases: `Tr[F_a F_b] = 2 δ_ab`.
pub const BASIS_NORMALIZATION: f64 = 2.0;

/// Smallest eigenvalue a state may have and still count as full-rank.
pub const RANK_FLOOR: f64 = 1e-12;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const EIGENVALUE_FLOOR: f64 = -1e-10;
const TRACELESS_TOL: f64 = 1e-12;
const GRAM_TOL: f64 = 1e-10;

/// JSON interchange form of a complex matrix: `dim` plus row-major real and
/// imaginary parts. All file formats downstream build on this encoding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    fn to_matrix(&self) -> Result<CMatrix> {
        let d = self.dim;
        if self.re.len() != d || self.im.len() != d {
            return Err(Error::InvalidConfig {
                reason: format!("matrix rows do not match dim {d}"),
            });
        }
        let mut m = Array2::zeros((d, d));
        for i in 0..d {
            if self.re[i].len() != d || self.im[i].len() != d {
                return Err(Error::InvalidConfig {
                    reason: format!("matrix row {i} does not match dim {d}"),
                });
            }
            for j in 0..d {
                m[[i, j]] = Complex64::new(self.re[i][j], self.im[i][j]);
            }
        }
        Ok(m)
    }

    fn from_matrix(m: &CMatrix) -> Self {
        let d = m.nrows();
        let re = (0..d)
            .map(|i| (0..d).map(|j| m[[i, j]].re).collect())
            .collect();
        let im = (0..d)
            .map(|i| (0..d).map(|j| m[[i, j]].im).collect())
            .collect();
        Self { dim: d, re, im }
    }
}

/// A Hermitian operator on a d-dimensional Hilbert space (observables,
/// generators, logarithms of states).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct HermitianOperator {
    entries: CMatrix,
}

impl HermitianOperator {
    /// Validates squareness, `dim >= 2`, and Hermiticity within `1e-12`
    /// elementwise, then stores the exact Hermitian part.
    pub fn new(entries: Array2<Complex64>) -> Result<Self> {
        let (rows, cols) = entries.dim();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows < 2 {
            return Err(Error::DimensionTooSmall { found: rows });
        }
        let deviation = linalg::hermitian_deviation(&entries);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self {
            entries: linalg::hermitize(&entries),
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    /// Trace, real by Hermiticity.
    pub fn trace(&self) -> f64 {
        linalg::trace(&self.entries).re
    }

    /// `A - (Tr A / d) I`.
    pub fn traceless_part(&self) -> Self {
        let d = self.dim();
        let shift = Complex64::new(self.trace() / d as f64, 0.0);
        let entries = &self.entries - &(linalg::identity(d) * shift);
        Self { entries }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: &self.entries * Complex64::new(factor, 0.0),
        }
    }

    /// `A + factor * B`.
    pub fn add_scaled(&self, other: &Self, factor: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self {
            entries: &self.entries + &(&other.entries * Complex64::new(factor, 0.0)),
        })
    }

    /// Hilbert-Schmidt inner product `Tr[A B]`, real for Hermitian operands.
    pub fn hs_inner(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(linalg::trace(&self.entries.dot(&other.entries)).re)
    }

    /// Hilbert-Schmidt (Frobenius) norm.
    pub fn hs_norm(&self) -> f64 {
        linalg::frobenius(&self.entries)
    }

    /// Smallest and largest eigenvalue.
    pub fn spectral_bounds(&self) -> Result<(f64, f64)> {
        let (vals, _) = linalg::eigh(&self.entries)?;
        Ok((vals[0], vals[vals.len() - 1]))
    }
}

impl TryFrom<MatrixJson> for HermitianOperator {
    type Error = Error;

    fn try_from(value: MatrixJson) -> Result<Self> {
        Self::new(value.to_matrix()?)
    }
}

impl From<HermitianOperator> for MatrixJson {
    fn from(value: HermitianOperator) -> Self {
        Self::from_matrix(&value.entries)
    }
}

/// A density matrix: positive, unit-trace Hermitian operator.
///
/// Construction clamps eigenvalues in `[-1e-10, 0)` to zero and renormalizes
/// the trace; eigenvalues below `-1e-10` are rejected. The cached spectrum is
/// reused by the matrix-function operations.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct DensityMatrix {
    entries: CMatrix,
    eigenvalues: Array1<f64>,
    eigenvectors: CMatrix,
    full_rank: bool,
}

impl DensityMatrix {
    pub fn new(entries: Array2<Complex64>) -> Result<Self> {
        let (rows, cols) = entries.dim();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows < 2 {
            return Err(Error::DimensionTooSmall { found: rows });
        }
        let deviation = linalg::hermitian_deviation(&entries);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let entries = linalg::hermitize(&entries);
        let trace = linalg::trace(&entries).re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace { trace });
        }
        let (mut vals, vecs) = linalg::eigh(&entries)?;
        let min = vals[0];
        if min < EIGENVALUE_FLOOR {
            return Err(Error::NegativeEigenvalue { value: min });
        }
        if min < 0.0 {
            vals.mapv_inplace(|p| p.max(0.0));
            return Ok(Self::from_spectrum(&vals, &vecs));
        }
        let full_rank = min > RANK_FLOOR;
        Ok(Self {
            entries,
            eigenvalues: vals,
            eigenvectors: vecs,
            full_rank,
        })
    }

    /// Builds a state from a nonnegative spectrum and orthonormal
    /// eigenvectors, renormalizing the eigenvalue sum to one.
    pub(crate) fn from_spectrum(vals: &Array1<f64>, vecs: &CMatrix) -> Self {
        let sum: f64 = vals.sum();
        let normalized = vals.mapv(|p| p / sum);
        let entries = linalg::from_spectrum(&normalized, vecs, |p| p);
        let full_rank = normalized.iter().cloned().fold(f64::INFINITY, f64::min) > RANK_FLOOR;
        Self {
            entries,
            eigenvalues: normalized,
            eigenvectors: vecs.clone(),
            full_rank,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    pub(crate) fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// True when the smallest eigenvalue exceeds [`RANK_FLOOR`].
    pub fn is_full_rank(&self) -> bool {
        self.full_rank
    }

    /// Frobenius distance to another state.
    pub fn distance(&self, other: &Self) -> f64 {
        linalg::frobenius(&(&self.entries - &other.entries))
    }
}

impl TryFrom<MatrixJson> for DensityMatrix {
    type Error = Error;

    fn try_from(value: MatrixJson) -> Result<Self> {
        Self::new(value.to_matrix()?)
    }
}

impl From<DensityMatrix> for MatrixJson {
    fn from(value: DensityMatrix) -> Self {
        Self::from_matrix(&value.entries)
    }
}

/// An informationally complete set of `d^2 - 1` traceless Hermitian
/// observables, orthonormal as `Tr[F_a F_b] = 2 δ_ab`.
#[derive(Debug, Clone)]
pub struct ObservableBasis {
    dim: usize,
    observables: Vec<HermitianOperator>,
}

impl ObservableBasis {
    pub fn new(dim: usize, observables: Vec<HermitianOperator>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall { found: dim });
        }
        let expected = dim * dim - 1;
        if observables.len() != expected {
            return Err(Error::WrongBasisSize {
                expected,
                found: observables.len(),
            });
        }
        for f in &observables {
            if f.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: f.dim(),
                });
            }
            let tr = f.trace().abs();
            if tr > TRACELESS_TOL {
                return Err(Error::NotTraceless { deviation: tr });
            }
        }
        let mut worst = 0.0f64;
        for (a, fa) in observables.iter().enumerate() {
            for (b, fb) in observables.iter().enumerate() {
                let target = if a == b { BASIS_NORMALIZATION } else { 0.0 };
                let dev = (fa.hs_inner(fb)? - target).abs();
                worst = worst.max(dev);
            }
        }
        if worst > GRAM_TOL {
            return Err(Error::NotOrthonormal { deviation: worst });
        }
        Ok(Self { dim, observables })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of observables, `d^2 - 1`.
    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn observables(&self) -> &[HermitianOperator] {
        &self.observables
    }

    pub fn get(&self, b: usize) -> &HermitianOperator {
        &self.observables[b]
    }

    /// Assembles `Σ_b coeffs[b] F_b`.
    pub fn assemble(&self, coeffs: &Array1<f64>) -> Result<HermitianOperator> {
        if coeffs.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: coeffs.len(),
            });
        }
        let mut entries: CMatrix = Array2::zeros((self.dim, self.dim));
        for (c, f) in coeffs.iter().zip(&self.observables) {
            entries = entries + f.entries() * Complex64::new(*c, 0.0);
        }
        HermitianOperator::new(entries)
    }

    /// Projects onto basis coefficients: `Tr[A F_b] / 2`. Together with
    /// [`Self::assemble`] this inverts the expansion of any traceless
    /// Hermitian operator.
    pub fn coefficients(&self, a: &HermitianOperator) -> Result<Array1<f64>> {
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: a.dim(),
            });
        }
        let mut out = Array1::zeros(self.len());
        for (b, f) in self.observables.iter().enumerate() {
            out[b] = a.hs_inner(f)? / BASIS_NORMALIZATION;
        }
        Ok(out)
    }
}

/// The Pauli basis `{σ_x, σ_y, σ_z}` for dimension 2.
pub fn pauli_basis() -> ObservableBasis {
    gell_mann_basis(2).expect("the qubit basis construction cannot fail")
}

/// Generalized Gell-Mann basis for any `dim >= 2`, normalized to
/// `Tr[F_a F_b] = 2 δ_ab`.
///
/// Ordering (part of the interchange contract for coefficient vectors): for
/// each index pair `j < k` in lexicographic order, the symmetric element
/// `E_jk + E_kj` followed by the antisymmetric `-i E_jk + i E_kj`; then the
/// `d - 1` diagonal elements `sqrt(2/(l(l+1))) (Σ_{j<l} E_jj - l E_ll)`. For
/// `dim = 2` this is exactly `{σ_x, σ_y, σ_z}`.
pub fn gell_mann_basis(dim: usize) -> Result<ObservableBasis> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall { found: dim });
    }
    let mut observables = Vec::with_capacity(dim * dim - 1);
    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut sym: CMatrix = Array2::zeros((dim, dim));
            sym[[j, k]] = Complex64::new(1.0, 0.0);
            sym[[k, j]] = Complex64::new(1.0, 0.0);
            observables.push(HermitianOperator::new(sym)?);
            let mut asym: CMatrix = Array2::zeros((dim, dim));
            asym[[j, k]] = Complex64::new(0.0, -1.0);
            asym[[k, j]] = Complex64::new(0.0, 1.0);
            observables.push(HermitianOperator::new(asym)?);
        }
    }
    for l in 1..dim {
        let scale = (2.0 / (l as f64 * (l + 1) as f64)).sqrt();
        let mut diag: CMatrix = Array2::zeros((dim, dim));
        for j in 0..l {
            diag[[j, j]] = Complex64::new(scale, 0.0);
        }
        diag[[l, l]] = Complex64::new(-scale * l as f64, 0.0);
        observables.push(HermitianOperator::new(diag)?);
    }
    ObservableBasis::new(dim, observables)
}

/// Expectation value `Tr[ρ A]`, real within numerical tolerance for Hermitian
/// inputs (the imaginary round-off is discarded).
pub fn expectation(rho: &DensityMatrix, a: &HermitianOperator) -> Result<f64> {
    if rho.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: a.dim(),
        });
    }
    Ok(linalg::trace(&rho.entries().dot(a.entries())).re)
}

/// Spectral logarithm of a full-rank state.
pub fn matrix_log(rho: &DensityMatrix) -> Result<HermitianOperator> {
    if !rho.is_full_rank() {
        return Err(Error::BoundaryState {
            min_eigenvalue: rho.min_eigenvalue(),
        });
    }
    let entries = linalg::from_spectrum(rho.eigenvalues(), rho.eigenvectors(), f64::ln);
    HermitianOperator::new(entries)
}

/// `(exp(A)/Tr[exp(A)], ln Tr[exp(A)])`: the normalized exponential and the
/// log-partition value. Overflow is guarded by a spectral shift (the largest
/// eigenvalue is subtracted before exponentiating and added back to the log).
pub fn matrix_exp_normalized(a: &HermitianOperator) -> Result<(DensityMatrix, f64)> {
    let (vals, vecs) = linalg::eigh(a.entries())?;
    let shift = vals[vals.len() - 1];
    let weights = vals.mapv(|v| (v - shift).exp());
    let partition: f64 = weights.sum();
    let log_z = partition.ln() + shift;
    Ok((DensityMatrix::from_spectrum(&weights, &vecs), log_z))
}

/// Relative entropy `S(ρ‖σ) = Tr[ρ(ln ρ - ln σ)]`, with the `0 ln 0 = 0`
/// convention for zero eigenvalues of `ρ`; requires full-rank `σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let log_sigma = matrix_log(sigma)?;
    let rho_log_rho: f64 = rho
        .eigenvalues()
        .iter()
        .map(|&p| if p > 0.0 { p * p.ln() } else { 0.0 })
        .sum();
    let cross = expectation(rho, &log_sigma)?;
    // Mathematically nonnegative; clip the round-off when rho is close to
    // sigma so the sign contract holds exactly.
    Ok((rho_log_rho - cross).max(0.0))
}

/// Acute Hilbert-Schmidt angle between the lines spanned by the traceless
/// parts of two Hermitian operators. Sign-blind because generator directions
/// are only defined up to scale.
pub fn hilbert_schmidt_angle(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let ta = a.traceless_part();
    let tb = b.traceless_part();
    let na = ta.hs_norm();
    let nb = tb.hs_norm();
    if na < 1e-300 || nb < 1e-300 {
        return Err(Error::ZeroGenerator);
    }
    let ua = &ta.entries * Complex64::new(1.0 / na, 0.0);
    let ub = &tb.entries * Complex64::new(1.0 / nb, 0.0);
    let diff = linalg::frobenius(&(&ua - &ub));
    let sum = linalg::frobenius(&(&ua + &ub));
    let chord = diff.min(sum);
    Ok(2.0 * (chord / 2.0).asin())
}
