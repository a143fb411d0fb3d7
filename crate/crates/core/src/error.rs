//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong across the crate.
///
/// Validation-style variants (bad shapes, bad inputs, bad configuration) are
/// distinguished from numerical ones (boundary states, singular or degenerate
/// matrices, root solves out of range) so front ends can map them to distinct
/// exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be at least 2, found {found}")]
    DimensionTooSmall { found: usize },

    #[error("matrix is not Hermitian: max |A - A^H| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("trace must be 1, found {trace}")]
    InvalidTrace { trace: f64 },

    #[error("eigenvalue {value:e} below the admissible floor -1e-10")]
    NegativeEigenvalue { value: f64 },

    #[error("boundary state: smallest eigenvalue {min_eigenvalue:e} is at or below the rank floor")]
    BoundaryState { min_eigenvalue: f64 },

    #[error("operator is not traceless: |trace| = {deviation:e}")]
    NotTraceless { deviation: f64 },

    #[error("basis is not orthonormal: max Gram deviation {deviation:e}")]
    NotOrthonormal { deviation: f64 },

    #[error("basis must contain {expected} observables, found {found}")]
    WrongBasisSize { expected: usize, found: usize },

    #[error("coordinate vector has a non-finite entry")]
    NonFiniteCoordinates,

    #[error("matrix is singular or not positive definite")]
    SingularMatrix,

    #[error("covariance matrix is zero: no preferred direction")]
    ZeroCovariance,

    #[error("generator vanishes after traceless projection")]
    ZeroGenerator,

    #[error("target expectation {target} outside the attainable open interval ({lo}, {hi})")]
    TargetOutOfRange { target: f64, lo: f64, hi: f64 },

    #[error("root solve failed to converge: {context}")]
    ConvergenceFailure { context: String },

    #[error("image set needs at least 2 images, found {found}")]
    TooFewImages { found: usize },

    #[error("sample size must be at least 1")]
    InvalidSampleSize,

    #[error("{samples} samples cannot allocate one shot to each of {settings} settings")]
    TooFewSamples { samples: u64, settings: usize },

    #[error("Bloch vector length {norm} exceeds 1")]
    BlochOutOfBall { norm: f64 },

    #[error("radius {value} outside [0, 1]")]
    RadiusOutOfRange { value: f64 },

    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error("linear algebra backend failure: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}
