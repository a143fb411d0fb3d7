//! Reconstruction of effective relaxation dynamics from scattered tomographic
//! snapshots.
//!
//! A quantum system is prepared repeatedly in the same unknown state and
//! brought into contact with an unknown heat bath for a varying, unrecorded
//! duration. Each run ends with state tomography, so the data consist of
//! tomographic images scattered along one relaxation curve. This crate infers
//! that curve: the direction of the effective dissipative force `G` and a
//! state the curve passes through, via a maximum-likelihood analysis in the
//! geometry induced by the Bogoliubov-Kubo-Mori (BKM) metric.
//!
//! Pipeline (see the module docs for the underlying identities):
//!
//! 1. [`states`]: density matrices, observable bases, matrix functions.
//! 2. [`geometry`]: the Gibbs parametrization `rho ∝ exp(anchor − λ^b F_b)`,
//!    the BKM correlation matrix `C` (Hessian of `ln Z`), coordinate
//!    pushforwards, and the relative-entropy gradient.
//! 3. [`trajectory`]: steepest-descent arcs `rho(t) ∝ exp(ln rho_base + tG)`,
//!    flow integration, and monotone expectation matching.
//! 4. [`estimator`]: weighted image statistics, the dominant generalized
//!    eigenvector of `C^{-1} Γ`, likelihood evaluation, reconstruction.
//! 5. [`qubit`]: closed-form Bloch-sphere geometry and the tilting angle.
//! 6. [`synth`]: seeded synthetic experiments with finite-sample tomography
//!    noise, used to validate the estimator end to end.
//!
//! With the default `parallel` feature the per-image and per-run bulk work is
//! distributed with rayon; disabling it yields a dependency-light sequential
//! build with bit-identical results.

pub mod error;
pub mod estimator;
pub mod geometry;
pub mod qubit;
pub mod states;
pub mod synth;
pub mod trajectory;

mod exec;
mod linalg;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Name of the compiled execution backend: `"rayon"` with the default
/// `parallel` feature, `"sequential"` without it. Benchmarks embed this in
/// their IDs so the two modes can be compared side by side.
pub const fn execution_mode() -> &'static str {
    #[cfg(feature = "parallel")]
    {
        "rayon"
    }
    #[cfg(not(feature = "parallel"))]
    {
        "sequential"
    }
}
