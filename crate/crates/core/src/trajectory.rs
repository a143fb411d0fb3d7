//! Steepest-descent relaxation curves.
//!
//! A curve is stored as a one-parameter exponential arc through a known
//! on-curve state: `rho(t) ∝ exp(ln(base) + t G)` with a traceless generator
//! `G`. The parameter increases toward the equilibrium end; when the arc is
//! built from endpoints, `t = 0` gives the initial state and `t = 1` the
//! reference. The module also provides the literal exponential-decay
//! interpolation, a fixed-step integrator for the coordinate flow
//! `dλ/dt = −λ/τ`, and a solver that locates the unique point of the arc
//! with a prescribed generator expectation.

use ndarray::Array1;

use crate::error::Error;
use crate::geometry::{lambda_from_state, state_from_lambda, bkm_variance, GibbsChart, LambdaCoords};
use crate::states::{
    expectation, matrix_exp_normalized, matrix_log, DensityMatrix, HermitianOperator,
    ObservableBasis,
};
use crate::Result;

/// Generators with Hilbert-Schmidt norm below this are treated as zero;
/// the arc degenerates to a point and expectation matching is ill-posed.
const GENERATOR_FLOOR: f64 = 1e-10;

/// Bracket expansion stops at `|t| = BRACKET_CAP_SCALE / ‖G‖_spectral`
/// to keep `exp(ln(base) + t G)` away from floating-point overflow.
const BRACKET_CAP_SCALE: f64 = 500.0;

/// Absolute tolerance on `|⟨G⟩ − target|` at the matched point.
const MATCH_TOL: f64 = 1e-10;

/// Relative tolerance on the bisection bracket width before Newton polish.
const BISECT_TOL: f64 = 1e-13;

/// A steepest-descent curve, anchored at a state known to lie on it.
///
/// The anchor is deliberately not the equilibrium state: the estimator can
/// only ever determine some state on the curve, so the arc is parametrized
/// from there. The logarithm of the base is cached because every point
/// evaluation needs it.
#[derive(Debug, Clone)]
pub struct Trajectory {
    base: DensityMatrix,
    generator: HermitianOperator,
    basis: ObservableBasis,
    log_base: HermitianOperator,
}

impl Trajectory {
    /// Builds a curve from an on-curve full-rank state and a generator.
    ///
    /// The generator is projected onto its traceless part: additive
    /// constants in `G` only reparametrize the normalization and are not
    /// observable.
    pub fn new(
        base: DensityMatrix,
        generator: HermitianOperator,
        basis: ObservableBasis,
    ) -> Result<Self> {
        if generator.dim() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: generator.dim(),
            });
        }
        if basis.dim() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: basis.dim(),
            });
        }
        let log_base = matrix_log(&base)?;
        Ok(Self {
            base,
            generator: generator.traceless_part(),
            basis,
            log_base,
        })
    }

    /// State the curve is anchored at (`t = 0`).
    pub fn base(&self) -> &DensityMatrix {
        &self.base
    }

    /// Traceless generator of the arc.
    pub fn generator(&self) -> &HermitianOperator {
        &self.generator
    }

    /// Observable basis the curve is expressed in.
    pub fn basis(&self) -> &ObservableBasis {
        &self.basis
    }

    /// Hilbert space dimension.
    pub fn dim(&self) -> usize {
        self.base.dim()
    }
}

/// Parameters of the exponential-relaxation flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    tau: f64,
    t_max: f64,
    steps: usize,
}

impl FlowParams {
    /// Validates a relaxation time, horizon and step count.
    pub fn new(tau: f64, t_max: f64, steps: usize) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidConfig {
                reason: format!("relaxation time must be positive, got {tau}"),
            });
        }
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidConfig {
                reason: format!("time horizon must be positive, got {t_max}"),
            });
        }
        if steps == 0 {
            return Err(Error::InvalidConfig {
                reason: "step count must be at least 1".into(),
            });
        }
        Ok(Self { tau, t_max, steps })
    }

    /// Relaxation time τ.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Time horizon of the sampled flow.
    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Number of integration steps (the flow is sampled at `steps + 1` times).
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Uniform sample times `0, h, …, t_max` with `h = t_max / steps`.
    fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.t_max / self.steps as f64;
        (0..=self.steps).map(move |k| k as f64 * h)
    }
}

/// Builds the steepest-descent curve through two full-rank states.
///
/// The generator is the traceless part of `ln(sigma) − ln(rho0)`; with the
/// base at `rho0` the curve passes through `sigma` at `t = 1`.
pub fn trajectory_from_endpoints(
    rho0: &DensityMatrix,
    sigma: &DensityMatrix,
    basis: &ObservableBasis,
) -> Result<Trajectory> {
    if sigma.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho0.dim(),
            found: sigma.dim(),
        });
    }
    let generator = matrix_log(sigma)?.add_scaled(&matrix_log(rho0)?, -1.0)?;
    Trajectory::new(rho0.clone(), generator, basis.clone())
}

/// Evaluates the arc at parameter `t`: the normalization of
/// `exp(ln(base) + t G)`.
pub fn trajectory_point(traj: &Trajectory, t: f64) -> Result<DensityMatrix> {
    if !t.is_finite() {
        return Err(Error::NonFiniteCoordinates);
    }
    let exponent = traj.log_base.add_scaled(&traj.generator, t)?;
    let (state, _) = matrix_exp_normalized(&exponent)?;
    Ok(state)
}

/// Samples the literal exponential-decay interpolation
/// `rho(t) = e^{−t/τ} rho0 + (1 − e^{−t/τ}) sigma` at `steps + 1` uniform
/// times in `[0, t_max]`.
///
/// This is the linear-response reference dynamics, used to validate the
/// flow machinery; it is not the model the estimator assumes.
pub fn relax_linear(
    rho0: &DensityMatrix,
    sigma: &DensityMatrix,
    params: &FlowParams,
) -> Result<Vec<DensityMatrix>> {
    if sigma.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho0.dim(),
            found: sigma.dim(),
        });
    }
    params
        .times()
        .map(|t| {
            let w = (-t / params.tau).exp();
            let entries = rho0.entries() * w + sigma.entries() * (1.0 - w);
            DensityMatrix::new(entries)
        })
        .collect()
}

/// Integrates the coordinate flow `dλ/dt = −λ/τ` from `rho0` with a
/// classical fixed-step fourth-order scheme, mapping each sample back to a
/// state through the chart.
///
/// The output has `steps + 1` states at uniform times in `[0, t_max]` and,
/// by the equivalence of the flow with the exponential arc, coincides with
/// `trajectory_point` at the rescaled parameter `1 − e^{−t/τ}`.
pub fn integrate_flow(
    chart: &GibbsChart,
    rho0: &DensityMatrix,
    params: &FlowParams,
) -> Result<Vec<DensityMatrix>> {
    let lam0 = lambda_from_state(chart, rho0)?;
    let tau = params.tau;
    let deriv = |v: &Array1<f64>| -> Array1<f64> { v * (-1.0 / tau) };

    let h = params.t_max / params.steps as f64;
    let mut v = lam0.values().clone();
    let mut out = Vec::with_capacity(params.steps + 1);
    let (state, _) = state_from_lambda(chart, &LambdaCoords::new(v.clone())?)?;
    out.push(state);
    for _ in 0..params.steps {
        let k1 = deriv(&v);
        let k2 = deriv(&(&v + &(&k1 * (h / 2.0))));
        let k3 = deriv(&(&v + &(&k2 * (h / 2.0))));
        let k4 = deriv(&(&v + &(&k3 * h)));
        v = &v + &((&k1 + &(&k2 * 2.0) + &(&k3 * 2.0) + &k4) * (h / 6.0));
        let (state, _) = state_from_lambda(chart, &LambdaCoords::new(v.clone())?)?;
        out.push(state);
    }
    Ok(out)
}

/// Finds the unique arc point with `⟨G⟩ = target_g`.
///
/// `⟨G⟩` is strictly increasing in `t` (its derivative is the BKM variance
/// of `G`), so the root is bracketed by doubling from `[−1, 1]`, narrowed by
/// bisection, and polished by safeguarded Newton steps using the variance as
/// the exact derivative. Targets outside the open interval spanned by the
/// spectrum of `G` are rejected: those values are not attained at finite `t`.
pub fn match_expectation(traj: &Trajectory, target_g: f64) -> Result<(f64, DensityMatrix)> {
    let g = traj.generator();
    if g.hs_norm() < GENERATOR_FLOOR {
        return Err(Error::ZeroGenerator);
    }
    let (lo, hi) = g.spectral_bounds()?;
    // A NaN target fails both comparisons and lands here as well.
    if !(target_g > lo && target_g < hi) {
        return Err(Error::TargetOutOfRange {
            target: target_g,
            lo,
            hi,
        });
    }
    let cap = BRACKET_CAP_SCALE / lo.abs().max(hi.abs());
    let residual = |t: f64| -> Result<(f64, DensityMatrix)> {
        let state = trajectory_point(traj, t)?;
        let r = expectation(&state, g)? - target_g;
        Ok((r, state))
    };

    // Expand the bracket until the residual changes sign.
    let mut a = -(1.0_f64.min(cap));
    let mut b = 1.0_f64.min(cap);
    let (mut ra, _) = residual(a)?;
    let (mut rb, _) = residual(b)?;
    for _ in 0..80 {
        if ra <= 0.0 {
            break;
        }
        if a <= -cap {
            return Err(Error::TargetOutOfRange {
                target: target_g,
                lo,
                hi,
            });
        }
        a = (a * 2.0).max(-cap);
        ra = residual(a)?.0;
    }
    for _ in 0..80 {
        if rb >= 0.0 {
            break;
        }
        if b >= cap {
            return Err(Error::TargetOutOfRange {
                target: target_g,
                lo,
                hi,
            });
        }
        b = (b * 2.0).min(cap);
        rb = residual(b)?.0;
    }
    if ra > 0.0 || rb < 0.0 {
        return Err(Error::ConvergenceFailure {
            context: "expectation matching failed to bracket the target".into(),
        });
    }

    // Bisection down to a narrow bracket.
    let mut t = 0.5 * (a + b);
    for _ in 0..200 {
        if b - a <= BISECT_TOL * t.abs().max(1.0) {
            break;
        }
        t = 0.5 * (a + b);
        let (rm, _) = residual(t)?;
        if rm.abs() < MATCH_TOL {
            break;
        }
        if rm < 0.0 {
            a = t;
        } else {
            b = t;
        }
    }

    // Newton polish with the exact derivative d⟨G⟩/dt = Var_BKM(G).
    for _ in 0..8 {
        let (r, state) = residual(t)?;
        if r.abs() < MATCH_TOL {
            return Ok((t, state));
        }
        let var = bkm_variance(&state, g)?;
        if !var.is_finite() || var <= 0.0 {
            break;
        }
        let next = t - r / var;
        // Keep the iterate inside the verified bracket.
        t = next.clamp(a, b);
    }

    let (r, state) = residual(t)?;
    if r.abs() < MATCH_TOL {
        Ok((t, state))
    } else {
        Err(Error::ConvergenceFailure {
            context: format!("expectation matching stalled with residual {r:.3e}"),
        })
    }
}
