//! Synthetic-experiment generation.
//!
//! A ground-truth pair (source state, bath equilibrium) fixes a relaxation
//! curve; random contact times place each run at a partial-relaxation point
//! `γ = e^{−t/τ}` of that curve, and tomography either reads the exact state
//! or simulates finite-sample measurement noise per basis setting. All
//! randomness flows from one seed through numbered ChaCha8 streams (stream 0
//! for contact times, stream `1 + i` for run `i`), so generation is
//! bit-reproducible regardless of scheduling.

use ndarray::Array1;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::estimator::{ImageSet, TomographicImage};
use crate::exec::try_map_indices;
use crate::linalg;
use crate::states::{
    expectation, gell_mann_basis, pauli_basis, DensityMatrix, HermitianOperator, ObservableBasis,
};
use crate::trajectory::{trajectory_from_endpoints, trajectory_point};
use crate::Result;

/// Rank-deficient tomography outputs are mixed with this much of the
/// maximally mixed state so that downstream logarithms exist.
const PROJECTION_MIX: f64 = 1e-10;

/// How long a run stays in contact with the bath.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ContactTimeDistribution {
    /// Uniform on `[a, b]`.
    Uniform { a: f64, b: f64 },
    /// Exponential with the given mean.
    Exponential { mean: f64 },
    /// Explicit times: one per run, or a single time broadcast to all runs.
    FixedList { times: Vec<f64> },
}

/// Whether images carry finite-sample noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// Images are the exact relaxed states.
    Exact,
    /// Images come from simulated projective measurements.
    Multinomial,
}

/// Full description of a synthetic experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Hilbert space dimension.
    pub dim: usize,
    /// Source state the bath perturbs.
    pub rho0: DensityMatrix,
    /// Bath equilibrium state.
    pub sigma: DensityMatrix,
    /// Relaxation time.
    pub tau: f64,
    /// Number of runs (tomographic images).
    pub runs: usize,
    /// Measurements per run.
    pub samples_per_run: u64,
    /// Contact-time law; omitted means uniform on `[0.5τ, 1.5τ]`
    /// (partial relaxation).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contact_time_distribution: Option<ContactTimeDistribution>,
    /// Noise model.
    pub noise: NoiseModel,
    /// Master seed for all streams.
    pub seed: u64,
}

impl ExperimentConfig {
    /// The configured distribution, or the partial-relaxation default.
    pub fn resolved_distribution(&self) -> ContactTimeDistribution {
        self.contact_time_distribution
            .clone()
            .unwrap_or(ContactTimeDistribution::Uniform {
                a: 0.5 * self.tau,
                b: 1.5 * self.tau,
            })
    }

    /// Checks every invariant that does not require running the experiment.
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::DimensionTooSmall { found: self.dim });
        }
        if self.rho0.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: self.rho0.dim(),
            });
        }
        if self.sigma.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: self.sigma.dim(),
            });
        }
        for state in [&self.rho0, &self.sigma] {
            if !state.is_full_rank() {
                return Err(Error::BoundaryState {
                    min_eigenvalue: state.min_eigenvalue(),
                });
            }
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::InvalidConfig {
                reason: format!("relaxation time must be positive, got {}", self.tau),
            });
        }
        if self.runs < 2 {
            return Err(Error::InvalidConfig {
                reason: format!("need at least 2 runs, got {}", self.runs),
            });
        }
        if self.samples_per_run == 0 {
            return Err(Error::InvalidSampleSize);
        }
        match self.resolved_distribution() {
            ContactTimeDistribution::Uniform { a, b } => {
                if !(a.is_finite() && b.is_finite() && 0.0 <= a && a <= b) {
                    return Err(Error::InvalidConfig {
                        reason: format!("uniform contact times need 0 <= a <= b, got [{a}, {b}]"),
                    });
                }
            }
            ContactTimeDistribution::Exponential { mean } => {
                if !(mean.is_finite() && mean > 0.0) {
                    return Err(Error::InvalidConfig {
                        reason: format!("exponential contact times need a positive mean, got {mean}"),
                    });
                }
            }
            ContactTimeDistribution::FixedList { times } => {
                if times.is_empty() || (times.len() != 1 && times.len() != self.runs) {
                    return Err(Error::InvalidConfig {
                        reason: format!(
                            "fixed contact-time list must have 1 or {} entries, got {}",
                            self.runs,
                            times.len()
                        ),
                    });
                }
                if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
                    return Err(Error::InvalidConfig {
                        reason: "contact times must be finite and nonnegative".into(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// What the generator knows and the estimator is asked to recover.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    /// Traceless part of `ln σ − ln ρ0`.
    pub generator_true: HermitianOperator,
    /// Per-run relaxation degree `γ_i = e^{−t_i/τ}`, in `(0, 1]`.
    pub gammas: Vec<f64>,
    /// The exact (noise-free) states the runs produced.
    pub exact_states: Vec<DensityMatrix>,
}

/// Runs the synthetic experiment described by the config.
pub fn generate(config: &ExperimentConfig) -> Result<(ImageSet, GroundTruth)> {
    config.validate()?;
    let basis = if config.dim == 2 {
        pauli_basis()
    } else {
        gell_mann_basis(config.dim)?
    };
    let traj = trajectory_from_endpoints(&config.rho0, &config.sigma, &basis)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(0);
    let times: Vec<f64> = match config.resolved_distribution() {
        ContactTimeDistribution::Uniform { a, b } => {
            (0..config.runs).map(|_| rng.gen_range(a..=b)).collect()
        }
        ContactTimeDistribution::Exponential { mean } => {
            let exp = Exp::new(1.0 / mean).map_err(|_| Error::InvalidConfig {
                reason: format!("exponential contact times need a positive mean, got {mean}"),
            })?;
            (0..config.runs).map(|_| exp.sample(&mut rng)).collect()
        }
        ContactTimeDistribution::FixedList { times } => {
            if times.len() == 1 {
                vec![times[0]; config.runs]
            } else {
                times
            }
        }
    };
    let gammas: Vec<f64> = times.iter().map(|t| (-t / config.tau).exp()).collect();

    let per_run = try_map_indices(config.runs, |i| {
        let exact = trajectory_point(&traj, 1.0 - gammas[i])?;
        let imaged = match config.noise {
            NoiseModel::Exact => exact.clone(),
            NoiseModel::Multinomial => {
                let mut run_rng = ChaCha8Rng::seed_from_u64(config.seed);
                run_rng.set_stream(1 + i as u64);
                simulate_tomography(&exact, &basis, config.samples_per_run, &mut run_rng)?
            }
        };
        Ok((exact, imaged))
    })?;

    let mut exact_states = Vec::with_capacity(config.runs);
    let mut images = Vec::with_capacity(config.runs);
    for (exact, imaged) in per_run {
        exact_states.push(exact);
        images.push(TomographicImage::new(imaged, config.samples_per_run)?);
    }
    let set = ImageSet::new(images, basis)?;
    let truth = GroundTruth {
        generator_true: traj.generator().clone(),
        gammas,
        exact_states,
    };
    Ok((set, truth))
}

/// Simulates projective tomography of `rho` with `n` measurements divided
/// evenly across the basis settings (remainder dropped), followed by linear
/// inversion and a physicality projection.
///
/// Each observable is measured in its own eigenbasis; the estimated
/// coordinate is the empirical mean of its eigenvalues. The inverted matrix
/// can be slightly unphysical, so negative eigenvalues are clamped to zero,
/// the spectrum renormalized, and a rank-deficient result mixed with a tiny
/// amount of the maximally mixed state.
pub fn simulate_tomography<R: Rng>(
    rho: &DensityMatrix,
    basis: &ObservableBasis,
    n: u64,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if rho.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: rho.dim(),
        });
    }
    let settings = basis.len();
    let shots = n / settings as u64;
    if shots == 0 {
        return Err(Error::TooFewSamples {
            samples: n,
            settings,
        });
    }
    let dim = rho.dim();
    let mut f_hat = Array1::zeros(settings);
    for b in 0..settings {
        let obs = basis.get(b);
        f_hat[b] = if dim == 2 {
            // Pauli outcomes are ±1: one binomial per setting.
            let p_plus = (0.5 * (1.0 + expectation(rho, obs)?)).clamp(0.0, 1.0);
            let n_plus = Binomial::new(shots, p_plus)
                .expect("clamped probability")
                .sample(rng);
            (2.0 * n_plus as f64 - shots as f64) / shots as f64
        } else {
            let (vals, vecs) = linalg::eigh(obs.entries())?;
            // Outcome probabilities in the observable's eigenbasis.
            let mut probs = vec![0.0f64; dim];
            for k in 0..dim {
                let mut p = Complex64::new(0.0, 0.0);
                for i in 0..dim {
                    for j in 0..dim {
                        p += vecs[[i, k]].conj() * rho.entries()[[i, j]] * vecs[[j, k]];
                    }
                }
                probs[k] = p.re.max(0.0);
            }
            let total: f64 = probs.iter().sum();
            for p in &mut probs {
                *p /= total;
            }
            // Multinomial draw as a chain of conditional binomials.
            let mut counts = vec![0u64; dim];
            let mut remaining = shots;
            let mut rest = 1.0f64;
            for k in 0..dim {
                if remaining == 0 {
                    break;
                }
                if k == dim - 1 {
                    counts[k] = remaining;
                    break;
                }
                let p_cond = (probs[k] / rest).clamp(0.0, 1.0);
                let draw = Binomial::new(remaining, p_cond)
                    .expect("clamped probability")
                    .sample(rng);
                counts[k] = draw;
                remaining -= draw;
                rest = (rest - probs[k]).max(0.0);
                if rest == 0.0 && remaining > 0 {
                    counts[k + 1..].fill(0);
                    counts[dim - 1] = remaining;
                    break;
                }
            }
            counts
                .iter()
                .zip(vals.iter())
                .map(|(c, g)| g * *c as f64)
                .sum::<f64>()
                / shots as f64
        };
    }

    // Linear inversion: ρ̂ = I/d + Σ_b f̂_b F_b / 2.
    let mut entries = linalg::identity(dim);
    entries.mapv_inplace(|z| z / dim as f64);
    for b in 0..settings {
        entries = entries + obs_scaled(basis.get(b), 0.5 * f_hat[b]);
    }
    let entries = linalg::hermitize(&entries);

    // Physicality projection: clamp negative eigenvalues, renormalize.
    let (vals, vecs) = linalg::eigh(&entries)?;
    let clamped = vals.mapv(|v| v.max(0.0));
    let projected = DensityMatrix::from_spectrum(&clamped, &vecs);
    if projected.is_full_rank() {
        return Ok(projected);
    }
    let mut mixed = projected.entries() * Complex64::new(1.0 - PROJECTION_MIX, 0.0);
    for i in 0..dim {
        mixed[[i, i]] += Complex64::new(PROJECTION_MIX / dim as f64, 0.0);
    }
    DensityMatrix::new(mixed)
}

fn obs_scaled(obs: &HermitianOperator, factor: f64) -> crate::linalg::CMatrix {
    obs.entries() * Complex64::new(factor, 0.0)
}
