//! On-disk formats: versioned experiment and result JSON, written with 17
//! significant digits so every floating-point value round-trips exactly.
//!
//! The experiment version tag carries the RNG identity (`1-chacha8`):
//! regenerating a file from its echoed config must be byte-identical, and
//! that promise breaks if the generator ever changes.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use relaxtrace::estimator::{ImageSet, TomographicImage};
use relaxtrace::states::{
    gell_mann_basis, pauli_basis, DensityMatrix, HermitianOperator, ObservableBasis,
};
use relaxtrace::synth::{ExperimentConfig, GroundTruth};

use crate::CliError;

/// Version tag of experiment files, including the RNG identity.
pub const EXPERIMENT_FORMAT_VERSION: &str = "1-chacha8";
/// Version tag of result files.
pub const RESULT_FORMAT_VERSION: &str = "1";

/// Which informationally complete observable set the file's coordinates
/// refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisId {
    /// The three Pauli matrices (qubits only).
    Pauli,
    /// The generalized Gell-Mann set for the file's dimension.
    GellMann,
}

impl BasisId {
    /// Canonical basis choice for a dimension.
    pub fn for_dim(dim: usize) -> Self {
        if dim == 2 {
            Self::Pauli
        } else {
            Self::GellMann
        }
    }

    /// Materializes the observable set.
    pub fn build(self, dim: usize) -> Result<ObservableBasis, relaxtrace::Error> {
        match self {
            Self::Pauli => {
                if dim != 2 {
                    return Err(relaxtrace::Error::DimensionMismatch {
                        expected: 2,
                        found: dim,
                    });
                }
                Ok(pauli_basis())
            }
            Self::GellMann => gell_mann_basis(dim),
        }
    }
}

/// One tomographic image and its measurement count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImageRecord {
    /// Reconstructed state of one run.
    pub state: DensityMatrix,
    /// Measurements behind the reconstruction.
    pub n: u64,
}

/// What the generator knew, carried along for validation studies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    /// True dissipative generator.
    pub generator: HermitianOperator,
    /// Per-run relaxation degrees.
    pub gammas: Vec<f64>,
    /// Echo of the generating config (seed included).
    pub config: ExperimentConfig,
}

/// A set of tomographic images from one experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentFile {
    /// Format version; files with any other tag are rejected.
    pub version: String,
    /// Observable set the experiment was measured in.
    pub basis_id: BasisId,
    /// Hilbert space dimension.
    pub dim: usize,
    /// The images, one per run.
    pub images: Vec<ImageRecord>,
    /// Present for synthetic data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruthRecord>,
}

impl ExperimentFile {
    /// Packages a generated experiment with its ground truth.
    pub fn from_generated(set: &ImageSet, config: &ExperimentConfig, truth: GroundTruth) -> Self {
        Self {
            version: EXPERIMENT_FORMAT_VERSION.to_string(),
            basis_id: BasisId::for_dim(config.dim),
            dim: config.dim,
            images: set
                .images()
                .iter()
                .map(|img| ImageRecord {
                    state: img.state().clone(),
                    n: img.sample_size(),
                })
                .collect(),
            ground_truth: Some(GroundTruthRecord {
                generator: truth.generator_true,
                gammas: truth.gammas,
                config: config.clone(),
            }),
        }
    }

    /// Rebuilds the in-memory image set this file describes.
    pub fn image_set(&self) -> Result<ImageSet, CliError> {
        let basis = self.basis_id.build(self.dim)?;
        let images = self
            .images
            .iter()
            .map(|record| TomographicImage::new(record.state.clone(), record.n))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ImageSet::new(images, basis)?)
    }
}

/// Output of a reconstruction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultFile {
    /// Format version; files with any other tag are rejected.
    pub version: String,
    /// Estimated direction, normalized to `ξᵀCξ = 1`.
    pub xi: Vec<f64>,
    /// Dissipative generator `G = −ξ^b F_b`.
    pub generator: HermitianOperator,
    /// Sample-size-weighted mixture of the images.
    pub center_of_mass: DensityMatrix,
    /// Largest generalized eigenvalue of the covariance against the metric.
    pub top_eigenvalue: f64,
    /// Maximized log-likelihood, additive constants dropped.
    pub log_likelihood: f64,
    /// True when the direction is statistically unidentified.
    pub ambiguity_flag: bool,
    /// Gap between the two largest generalized eigenvalues.
    pub spectral_gap: f64,
    /// Angle to the true generator, present when the input carried one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_to_truth: Option<f64>,
}

/// JSON formatter writing every float with 17 significant digits, enough to
/// reproduce any double exactly on read-back.
struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes with the 17-digit float encoding, newline-terminated.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| CliError::Io(e.to_string()))
}

fn check_version(kind: &str, found: &str, expected: &str) -> Result<(), CliError> {
    if found == expected {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "unsupported {kind} format version {found:?}, expected {expected:?}"
        )))
    }
}

/// Reads and version-checks an experiment file.
pub fn read_experiment(path: &Path) -> Result<ExperimentFile, CliError> {
    let text = fs::read_to_string(path)?;
    let file: ExperimentFile = serde_json::from_str(&text)?;
    check_version("experiment", &file.version, EXPERIMENT_FORMAT_VERSION)?;
    Ok(file)
}

/// Writes an experiment file.
pub fn write_experiment(path: &Path, file: &ExperimentFile) -> Result<(), CliError> {
    fs::write(path, to_json_string(file)?)?;
    Ok(())
}

/// Reads and version-checks a result file.
pub fn read_result(path: &Path) -> Result<ResultFile, CliError> {
    let text = fs::read_to_string(path)?;
    let file: ResultFile = serde_json::from_str(&text)?;
    check_version("result", &file.version, RESULT_FORMAT_VERSION)?;
    Ok(file)
}

/// Writes a result file.
pub fn write_result(path: &Path, file: &ResultFile) -> Result<(), CliError> {
    fs::write(path, to_json_string(file)?)?;
    Ok(())
}
