//! Helpers shared by the CLI integration tests.

#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use ndarray::array;
use num_complex::Complex64;
use relaxtrace::states::DensityMatrix;
use relaxtrace::synth::{ContactTimeDistribution, ExperimentConfig, NoiseModel};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Qubit state with the given Bloch components.
pub fn bloch(x: f64, y: f64, z: f64) -> DensityMatrix {
    DensityMatrix::new(array![
        [c(0.5 * (1.0 + z), 0.0), c(0.5 * x, -0.5 * y)],
        [c(0.5 * x, 0.5 * y), c(0.5 * (1.0 - z), 0.0)]
    ])
    .unwrap()
}

/// Reference qubit experiment: source off axis, bath maximally mixed.
pub fn reference_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        dim: 2,
        rho0: bloch(0.6, 0.3, 0.2),
        sigma: bloch(0.0, 0.0, 0.0),
        tau: 1.0,
        runs: 12,
        samples_per_run: 10_000,
        contact_time_distribution: Some(ContactTimeDistribution::Uniform { a: 0.5, b: 1.5 }),
        noise: NoiseModel::Exact,
        seed,
    }
}

/// Serializes a config to the given path.
pub fn write_config(path: &Path, config: &ExperimentConfig) {
    std::fs::write(path, serde_json::to_string_pretty(config).unwrap()).unwrap();
}

/// Runs the compiled binary with the given arguments.
pub fn run_bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaxtrace"))
        .args(args)
        .output()
        .expect("binary should launch")
}

/// Runs the binary and asserts success.
pub fn run_ok(args: &[&str]) -> Output {
    let out = run_bin(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Exit code of a finished command.
pub fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

/// Parses a likelihood-grid CSV and returns the maximum L column value.
pub fn grid_max_likelihood(csv: &str) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for line in csv.lines().skip(1) {
        let value: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        best = best.max(value);
    }
    best
}
