//! Closed-form qubit geometry.
//!
//! For a single qubit the BKM metric in the Pauli basis has an analytic
//! radial/transverse decomposition, which pins down how the inferred
//! dissipative direction tilts away from the naive principal axis of the
//! data cloud. The tilting angle and its small-`r` quadratic approximation
//! are exposed together with a sweep over Bloch radii, plus a direct
//! comparison between the naive and the metric-corrected direction on a
//! concrete image set.

use ndarray::{Array1, Array2};

use crate::error::Error;
use crate::estimator::{covariance_matrix, reconstruct, ImageSet};
use crate::geometry::CorrelationMatrix;
use crate::linalg::eigh_real;
use crate::states::{expectation, pauli_basis, DensityMatrix};
use crate::Result;

use num_complex::Complex64;

/// Tolerance on the Bloch-ball membership test, absorbing round-trip noise.
const BALL_TOL: f64 = 1e-12;

/// Below this radius `artanh(r)/r` switches to its Taylor series.
const SERIES_RADIUS: f64 = 1e-4;

/// Components below this magnitude are ignored when sign-fixing directions.
const SIGN_TOL: f64 = 1e-9;

/// A point of the Bloch ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    x: f64,
    y: f64,
    z: f64,
}

impl BlochVector {
    /// Validates membership in the closed Bloch ball.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm > 1.0 + BALL_TOL {
            return Err(Error::BlochOutOfBall { norm });
        }
        Ok(Self { x, y, z })
    }

    /// x component.
    pub fn x(&self) -> f64 {
        self.x
    }

    /// y component.
    pub fn y(&self) -> f64 {
        self.y
    }

    /// z component.
    pub fn z(&self) -> f64 {
        self.z
    }

    /// Radius `r = |v|`.
    pub fn r(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// `artanh(r)/r` with a series branch near zero (limit 1).
fn artanh_over_r(r: f64) -> f64 {
    if r < SERIES_RADIUS {
        let r2 = r * r;
        1.0 + r2 / 3.0 + r2 * r2 / 5.0
    } else {
        r.atanh() / r
    }
}

/// Fixes the overall sign so the first significant component is positive.
fn sign_fix(v: &mut Array1<f64>) {
    if let Some(first) = v.iter().find(|c| c.abs() > SIGN_TOL) {
        if *first < 0.0 {
            v.mapv_inplace(|c| -c);
        }
    }
}

/// Acute angle between two unit vectors, blind to their overall signs.
fn acute_angle(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    let diff = (a - b).dot(&(a - b)).sqrt();
    let sum = (a + b).dot(&(a + b)).sqrt();
    let chord = diff.min(sum);
    2.0 * (0.5 * chord).clamp(-1.0, 1.0).asin()
}

/// The state `ρ = (I + v·σ)/2`.
pub fn bloch_to_state(v: &BlochVector) -> Result<DensityMatrix> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    DensityMatrix::new(ndarray::array![
        [c(0.5 * (1.0 + v.z), 0.0), c(0.5 * v.x, -0.5 * v.y)],
        [c(0.5 * v.x, 0.5 * v.y), c(0.5 * (1.0 - v.z), 0.0)]
    ])
}

/// Pauli expectations of a qubit state.
pub fn state_to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let basis = pauli_basis();
    BlochVector::new(
        expectation(rho, basis.get(0))?,
        expectation(rho, basis.get(1))?,
        expectation(rho, basis.get(2))?,
    )
}

/// Closed-form BKM matrix at an interior Bloch vector, in the Pauli basis:
/// `(1 − r²)` along the radial direction and `r / artanh(r)` transversely.
pub fn qubit_bkm_closed_form(v: &BlochVector) -> Result<CorrelationMatrix> {
    let r = v.r();
    if r >= 1.0 {
        return Err(Error::BoundaryState {
            min_eigenvalue: 0.5 * (1.0 - r),
        });
    }
    let radial = 1.0 - r * r;
    let transverse = 1.0 / artanh_over_r(r);
    let mut entries = Array2::from_diag_elem(3, transverse);
    if r > 1e-300 {
        let n = [v.x / r, v.y / r, v.z / r];
        for a in 0..3 {
            for b in 0..3 {
                entries[[a, b]] += (radial - transverse) * n[a] * n[b];
            }
        }
    }
    CorrelationMatrix::new(entries)
}

/// The §-style tilting angle `φ(r) = arctan(1 − (1 − r²)·artanh(r)/r)`,
/// taken as exact on `[0, 1]` with the endpoint handled as a limit.
pub fn tilting_angle(r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::RadiusOutOfRange { value: r });
    }
    if r == 1.0 {
        return Ok(std::f64::consts::FRAC_PI_4);
    }
    Ok((1.0 - (1.0 - r * r) * artanh_over_r(r)).atan())
}

/// One row of a tilting-angle sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    /// Bloch radius.
    pub r: f64,
    /// Exact tilting angle `φ(r)`.
    pub phi_exact: f64,
    /// Quadratic approximation `(π/4)·r²`.
    pub phi_approx: f64,
}

/// Tabulates `φ(r)` against its quadratic approximation on a uniform grid
/// over `[0, 1)` plus the limit row at `r = 1`.
pub fn tilting_angle_sweep(n_points: usize) -> Result<Vec<SweepRow>> {
    if n_points < 2 {
        return Err(Error::InvalidConfig {
            reason: "sweep needs at least 2 grid points".into(),
        });
    }
    let quarter_pi = std::f64::consts::FRAC_PI_4;
    let mut rows = Vec::with_capacity(n_points + 1);
    for i in 0..n_points {
        let r = i as f64 / n_points as f64;
        rows.push(SweepRow {
            r,
            phi_exact: tilting_angle(r)?,
            phi_approx: quarter_pi * r * r,
        });
    }
    rows.push(SweepRow {
        r: 1.0,
        phi_exact: quarter_pi,
        phi_approx: quarter_pi,
    });
    Ok(rows)
}

/// Naive versus metric-corrected direction estimate on a qubit image set.
#[derive(Debug, Clone)]
pub struct DirectionComparison {
    /// Principal eigenvector of the covariance alone, unit length.
    pub naive: Array1<f64>,
    /// Reconstructed direction, renormalized to unit length.
    pub inferred: Array1<f64>,
    /// Acute angle between the two.
    pub angle: f64,
}

/// Compares the principal axis of the data cloud with the reconstructed
/// dissipative direction; the two differ whenever the metric at the center
/// of mass is anisotropic across the cloud.
pub fn naive_vs_inferred(set: &ImageSet) -> Result<DirectionComparison> {
    if set.basis().dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: set.basis().dim(),
        });
    }
    let gamma = covariance_matrix(set)?;
    let (vals, vecs) = eigh_real(&gamma)?;
    let k = vals.len();
    if vals[k - 1] <= 0.0 {
        return Err(Error::ZeroCovariance);
    }
    let mut naive = vecs.column(k - 1).to_owned();
    sign_fix(&mut naive);

    let est = reconstruct(set)?;
    let norm = est.xi.dot(&est.xi).sqrt();
    let mut inferred = est.xi / norm;
    sign_fix(&mut inferred);

    let angle = acute_angle(&naive, &inferred);
    Ok(DirectionComparison {
        naive,
        inferred,
        angle,
    })
}
