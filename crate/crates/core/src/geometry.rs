//! Information geometry of the Gibbs parametrization.
//!
//! Every full-rank state can be written relative to a full-rank reference
//! `σ` as
//!
//! ```text
//! ρ(λ) = Z(λ)^{-1} exp[(ln σ − ⟨ln σ⟩_σ) − Σ_b λ^b F_b],
//! ```
//!
//! which makes `λ = 0` the reference itself. The log-partition function
//! satisfies `∂ ln Z / ∂λ^a = −f_a` with `f_a = ⟨F_a⟩_ρ`, and its Hessian is
//! the Bogoliubov-Kubo-Mori (BKM) correlation matrix `C_ab`, computed here by
//! the spectral Kubo-Mori kernel. `C` converts between the two natural
//! coordinate systems (`∂_a = −C_ab ∂^b`, `dλ^a = −(C^{-1})^{ab} df_b`), the
//! relative-entropy differential is `dS(ρ‖σ) = −λ^a df_a`, and the
//! steepest-descent tangent in λ-coordinates is `−λ`.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Cholesky, UPLO};

use crate::linalg;
use crate::states::{
    expectation, matrix_exp_normalized, matrix_log, DensityMatrix, HermitianOperator,
    ObservableBasis, BASIS_NORMALIZATION,
};
use crate::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;

/// Relative threshold below which the Kubo-Mori kernel switches to its
/// diagonal limit `(p + q)/2` to avoid cancellation in `(p−q)/(ln p − ln q)`.
const KERNEL_DEGENERACY: f64 = 1e-12;

/// A Gibbs coordinate chart: full-rank reference state, observable basis, and
/// the precomputed anchor `ln σ − ⟨ln σ⟩_σ · I`.
#[derive(Debug, Clone)]
pub struct GibbsChart {
    reference: DensityMatrix,
    basis: ObservableBasis,
    anchor: HermitianOperator,
}

impl GibbsChart {
    pub fn new(reference: DensityMatrix, basis: ObservableBasis) -> Result<Self> {
        if reference.dim() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: reference.dim(),
            });
        }
        let log_ref = matrix_log(&reference)?;
        let mean = expectation(&reference, &log_ref)?;
        let identity = HermitianOperator::new(linalg::identity(reference.dim()))?;
        let anchor = log_ref.add_scaled(&identity, -mean)?;
        Ok(Self {
            reference,
            basis,
            anchor,
        })
    }

    pub fn reference(&self) -> &DensityMatrix {
        &self.reference
    }

    pub fn basis(&self) -> &ObservableBasis {
        &self.basis
    }

    pub fn anchor(&self) -> &HermitianOperator {
        &self.anchor
    }

    pub fn dim(&self) -> usize {
        self.reference.dim()
    }

    /// Number of coordinates, `d^2 - 1`.
    pub fn coords(&self) -> usize {
        self.basis.len()
    }
}

/// Lagrange parameters `λ^b` of a state in a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaCoords {
    values: Array1<f64>,
}

impl LambdaCoords {
    pub fn new(values: Array1<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCoordinates);
        }
        Ok(Self { values })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            values: Array1::zeros(len),
        }
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }
}

/// Expectation coordinates `f_b = ⟨F_b⟩_ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FCoords {
    values: Array1<f64>,
}

impl FCoords {
    pub fn new(values: Array1<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCoordinates);
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }
}

/// The BKM correlation matrix `C_ab` at a state: real, symmetric, positive
/// definite away from the boundary. Linear systems in `C` are solved through
/// its Cholesky factor; the inverse is never formed.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    entries: Array2<f64>,
}

impl CorrelationMatrix {
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        let (rows, cols) = entries.dim();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        let mut worst = 0.0f64;
        for i in 0..rows {
            for j in 0..i {
                worst = worst.max((entries[[i, j]] - entries[[j, i]]).abs());
            }
        }
        if worst > SYMMETRY_TOL {
            return Err(Error::NotHermitian { deviation: worst });
        }
        let entries = 0.5 * (&entries + &entries.t());
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Lower Cholesky factor; fails with [`Error::SingularMatrix`] when the
    /// matrix is not positive definite.
    pub fn cholesky_lower(&self) -> Result<Array2<f64>> {
        self.entries
            .cholesky(UPLO::Lower)
            .map_err(|_| Error::SingularMatrix)
    }

    /// Solves `C x = rhs` via the Cholesky factor.
    pub fn solve(&self, rhs: &Array1<f64>) -> Result<Array1<f64>> {
        if rhs.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rhs.len(),
            });
        }
        let l = self.cholesky_lower()?;
        let y = linalg::solve_lower(&l, rhs);
        Ok(linalg::solve_lower_transpose(&l, &y))
    }

    /// Quadratic form `v^T C v`.
    pub fn quadratic_form(&self, v: &Array1<f64>) -> f64 {
        v.dot(&self.entries.dot(v))
    }
}

/// State and log-partition value at Lagrange parameters `λ`:
/// `ρ = exp(anchor − λ^b F_b)/Z`, `ln Z` with `∂ ln Z/∂λ^a = −f_a`.
pub fn state_from_lambda(chart: &GibbsChart, lam: &LambdaCoords) -> Result<(DensityMatrix, f64)> {
    if lam.values().len() != chart.coords() {
        return Err(Error::DimensionMismatch {
            expected: chart.coords(),
            found: lam.values().len(),
        });
    }
    let combination = chart.basis().assemble(lam.values())?;
    let exponent = chart.anchor().add_scaled(&combination, -1.0)?;
    matrix_exp_normalized(&exponent)
}

/// Lagrange parameters of a full-rank state:
/// `λ^b = −Tr[F_b (ln ρ − ln σ)] / 2`.
pub fn lambda_from_state(chart: &GibbsChart, rho: &DensityMatrix) -> Result<LambdaCoords> {
    if rho.dim() != chart.dim() {
        return Err(Error::DimensionMismatch {
            expected: chart.dim(),
            found: rho.dim(),
        });
    }
    let log_rho = matrix_log(rho)?;
    let log_ref = matrix_log(chart.reference())?;
    let delta = log_rho.add_scaled(&log_ref, -1.0)?;
    let mut values = Array1::zeros(chart.coords());
    for (b, f) in chart.basis().observables().iter().enumerate() {
        values[b] = -f.hs_inner(&delta)? / BASIS_NORMALIZATION;
    }
    LambdaCoords::new(values)
}

/// Expectation coordinates of a state.
pub fn f_from_state(basis: &ObservableBasis, rho: &DensityMatrix) -> Result<FCoords> {
    if rho.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: rho.dim(),
        });
    }
    let mut values = Array1::zeros(basis.len());
    for (b, f) in basis.observables().iter().enumerate() {
        values[b] = expectation(rho, f)?;
    }
    FCoords::new(values)
}

fn kubo_mori_kernel(p: f64, q: f64) -> f64 {
    if (p - q).abs() < KERNEL_DEGENERACY * p.max(q) {
        0.5 * (p + q)
    } else {
        (p - q) / (p.ln() - q.ln())
    }
}

/// BKM correlation matrix by the spectral Kubo-Mori formula: with
/// `ρ = Σ p_i |i⟩⟨i|` and `ΔF = F − ⟨F⟩`,
///
/// ```text
/// C_ab = Σ_{ij} k(p_i, p_j) ⟨i|ΔF_a|j⟩ ⟨j|ΔF_b|i⟩,
/// k(p, q) = (p − q)/(ln p − ln q),   k(p, p) = p.
/// ```
///
/// Equal to the Hessian of `ln Z` in the chart anchored at `ρ` (the defining
/// property, checked against finite differences in the tests).
pub fn bkm_matrix(basis: &ObservableBasis, rho: &DensityMatrix) -> Result<CorrelationMatrix> {
    if rho.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: rho.dim(),
        });
    }
    if !rho.is_full_rank() {
        return Err(Error::BoundaryState {
            min_eigenvalue: rho.min_eigenvalue(),
        });
    }
    let d = rho.dim();
    let n = basis.len();
    let p = rho.eigenvalues();
    let u = rho.eigenvectors();
    let u_adj = linalg::adjoint(u);

    // ΔF_b rotated into the eigenbasis of rho.
    let mut rotated = Vec::with_capacity(n);
    for f in basis.observables() {
        let mean = expectation(rho, f)?;
        let centered = f.entries() - &(linalg::identity(d) * num_complex::Complex64::new(mean, 0.0));
        rotated.push(u_adj.dot(&centered).dot(u));
    }

    let mut kernel = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            kernel[[i, j]] = kubo_mori_kernel(p[i], p[j]);
        }
    }

    let mut entries = Array2::zeros((n, n));
    for a in 0..n {
        for b in a..n {
            let mut sum = 0.0;
            for i in 0..d {
                for j in 0..d {
                    sum += kernel[[i, j]] * (rotated[a][[i, j]] * rotated[b][[i, j]].conj()).re;
                }
            }
            entries[[a, b]] = sum;
            entries[[b, a]] = sum;
        }
    }
    CorrelationMatrix::new(entries)
}

/// BKM variance of a single observable at a state: the same spectral kernel
/// contracted with `ΔA` twice. Strictly positive unless `A` is a multiple of
/// the identity; equals `d⟨A⟩/dt` along the exponential arc generated by `A`.
pub fn bkm_variance(rho: &DensityMatrix, a: &HermitianOperator) -> Result<f64> {
    if rho.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: a.dim(),
        });
    }
    if !rho.is_full_rank() {
        return Err(Error::BoundaryState {
            min_eigenvalue: rho.min_eigenvalue(),
        });
    }
    let d = rho.dim();
    let p = rho.eigenvalues();
    let u = rho.eigenvectors();
    let mean = expectation(rho, a)?;
    let centered = a.entries() - &(linalg::identity(d) * num_complex::Complex64::new(mean, 0.0));
    let rotated = linalg::adjoint(u).dot(&centered).dot(u);
    let mut sum = 0.0;
    for i in 0..d {
        for j in 0..d {
            sum += kubo_mori_kernel(p[i], p[j]) * rotated[[i, j]].norm_sqr();
        }
    }
    Ok(sum)
}

/// Pushforward of a tangent vector from λ- to f-coordinates: `v ↦ −C v`.
pub fn lambda_to_f_pushforward(c: &CorrelationMatrix, v: &Array1<f64>) -> Result<Array1<f64>> {
    if v.len() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            found: v.len(),
        });
    }
    Ok(-c.entries().dot(v))
}

/// Pushforward of a tangent vector from f- to λ-coordinates: `v ↦ −C^{-1} v`
/// (by linear solve; the inverse is never formed).
pub fn f_to_lambda_pushforward(c: &CorrelationMatrix, v: &Array1<f64>) -> Result<Array1<f64>> {
    Ok(-c.solve(v)?)
}

/// Components of the relative-entropy differential `dS(ρ‖σ)` in the `df`
/// cobasis: `−λ`.
pub fn entropy_gradient(chart: &GibbsChart, rho: &DensityMatrix) -> Result<Array1<f64>> {
    let lam = lambda_from_state(chart, rho)?;
    Ok(-lam.values())
}

/// Components of the steepest-descent tangent in the λ-coordinate basis:
/// `−λ`, i.e. `C^{-1}(−dS)` with time measured in units of the relaxation
/// constant.
pub fn steepest_descent_tangent(chart: &GibbsChart, rho: &DensityMatrix) -> Result<Array1<f64>> {
    let lam = lambda_from_state(chart, rho)?;
    Ok(-lam.values())
}
