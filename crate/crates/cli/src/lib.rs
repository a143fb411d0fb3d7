//! Implementation of the `relaxtrace` command line: the error-to-exit-code
//! policy and the four commands, kept out of `main` so integration tests can
//! call them directly.

pub mod files;

use std::fmt;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use relaxtrace::estimator::{likelihood_grid, reconstruct, ImageSet, TomographicImage};
use relaxtrace::qubit::tilting_angle_sweep;
use relaxtrace::states::{hilbert_schmidt_angle, DensityMatrix};
use relaxtrace::synth::{generate, ExperimentConfig};

use files::{ExperimentFile, ResultFile, RESULT_FORMAT_VERSION};

/// Command failure, classified for the exit code: 2 for invalid inputs,
/// 3 for numerical breakdowns (boundary states, singular or degenerate
/// systems), 4 for I/O.
#[derive(Debug)]
pub enum CliError {
    /// Inputs violate a precondition or cannot be parsed.
    Validation(String),
    /// The computation is numerically impossible on these inputs.
    Numerical(String),
    /// Reading or writing a file failed.
    Io(String),
}

impl CliError {
    /// Process exit code for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 2,
            Self::Numerical(_) => 3,
            Self::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Validation(msg) => write!(f, "invalid input: {msg}"),
            Self::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            Self::Io(msg) => write!(f, "io failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<relaxtrace::Error> for CliError {
    fn from(e: relaxtrace::Error) -> Self {
        use relaxtrace::Error as E;
        match e {
            E::BoundaryState { .. }
            | E::SingularMatrix
            | E::ZeroCovariance
            | E::ZeroGenerator
            | E::TargetOutOfRange { .. }
            | E::ConvergenceFailure { .. }
            | E::NonFiniteCoordinates
            | E::Linalg(_) => Self::Numerical(e.to_string()),
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        if e.classify() == serde_json::error::Category::Io {
            Self::Io(e.to_string())
        } else {
            Self::Validation(format!("parse error: {e}"))
        }
    }
}

/// Runs the synthetic experiment described by the config file and writes
/// the experiment (with ground truth) to `out`.
pub fn run_generate(
    config_path: &Path,
    out_path: &Path,
    seed_override: Option<u64>,
) -> Result<(), CliError> {
    let text = fs::read_to_string(config_path)?;
    let mut config: ExperimentConfig = serde_json::from_str(&text)?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    let (set, truth) = generate(&config)?;
    files::write_experiment(out_path, &ExperimentFile::from_generated(&set, &config, truth))
}

/// Reconstructs the relaxation curve from an experiment file and writes the
/// result to `out`. Ambiguity is reported as a warning, not an error; the
/// optional `regularize` mixes each image with `ε·I/d` before estimation.
pub fn run_estimate(
    in_path: &Path,
    out_path: &Path,
    regularize: Option<f64>,
) -> Result<(), CliError> {
    let file = files::read_experiment(in_path)?;
    let mut set = file.image_set()?;
    if let Some(epsilon) = regularize {
        set = regularized(&set, epsilon)?;
    }
    let estimate = reconstruct(&set)?;
    if estimate.ambiguous {
        eprintln!(
            "warning: direction is statistically ambiguous (spectral gap {:.3e}); \
             the reported direction is one of several near-optimal ones",
            estimate.spectral_gap
        );
    }
    let angle_to_truth = match &file.ground_truth {
        Some(truth) => Some(hilbert_schmidt_angle(&estimate.generator, &truth.generator)?),
        None => None,
    };
    let result = ResultFile {
        version: RESULT_FORMAT_VERSION.to_string(),
        xi: estimate.xi.to_vec(),
        generator: estimate.generator,
        center_of_mass: estimate.center_of_mass,
        top_eigenvalue: estimate.top_eigenvalue,
        log_likelihood: estimate.log_likelihood,
        ambiguity_flag: estimate.ambiguous,
        spectral_gap: estimate.spectral_gap,
        angle_to_truth,
    };
    files::write_result(out_path, &result)
}

/// Tabulates the qubit tilting angle on `points` grid points and writes the
/// CSV `r,phi_exact,phi_approx`.
pub fn run_qubit_sweep(points: usize, out_path: &Path) -> Result<(), CliError> {
    let rows = tilting_angle_sweep(points)?;
    let mut text = String::from("r,phi_exact,phi_approx\n");
    for row in rows {
        text.push_str(&format!(
            "{:.16e},{:.16e},{:.16e}\n",
            row.r, row.phi_exact, row.phi_approx
        ));
    }
    fs::write(out_path, text)?;
    Ok(())
}

/// Evaluates the likelihood over a fixed quasi-uniform direction grid and
/// writes the CSV `direction_index,xi_0,…,L`.
pub fn run_likelihood_grid(
    in_path: &Path,
    directions: usize,
    out_path: &Path,
) -> Result<(), CliError> {
    let file = files::read_experiment(in_path)?;
    let set = file.image_set()?;
    let rows = likelihood_grid(&set, directions)?;
    let coords = set.basis().len();
    let mut text = String::from("direction_index");
    for b in 0..coords {
        text.push_str(&format!(",xi_{b}"));
    }
    text.push_str(",L\n");
    for row in rows {
        text.push_str(&row.index.to_string());
        for value in row.xi.iter() {
            text.push_str(&format!(",{value:.16e}"));
        }
        text.push_str(&format!(",{:.16e}\n", row.log_likelihood));
    }
    fs::write(out_path, text)?;
    Ok(())
}

/// Mixes every image with `ε·I/d`, pulling boundary states into the
/// interior so their logarithms exist.
fn regularized(set: &ImageSet, epsilon: f64) -> Result<ImageSet, CliError> {
    if !(epsilon.is_finite() && (0.0..1.0).contains(&epsilon)) {
        return Err(CliError::Validation(format!(
            "regularization strength must lie in [0, 1), got {epsilon}"
        )));
    }
    let dim = set.basis().dim();
    let images = set
        .images()
        .iter()
        .map(|img| {
            let mut entries = img.state().entries() * Complex64::new(1.0 - epsilon, 0.0);
            for i in 0..dim {
                entries[[i, i]] += Complex64::new(epsilon / dim as f64, 0.0);
            }
            TomographicImage::new(DensityMatrix::new(entries)?, img.sample_size())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ImageSet::new(images, set.basis().clone())?)
}
