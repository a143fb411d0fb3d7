//! Helpers shared by the integration tests.

#![allow(dead_code)]

use ndarray::{array, Array2};
use num_complex::Complex64;
use rand::Rng;
use relaxtrace::states::DensityMatrix;

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

/// Random full-rank density matrix: a Ginibre draw `A A†` plus an identity
/// floor that keeps every eigenvalue comfortably positive, normalized to
/// unit trace. Generic complex entries, so nothing commutes by accident.
pub fn random_full_rank<R: Rng>(dim: usize, rng: &mut R) -> DensityMatrix {
    let mut a = Array2::<Complex64>::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            a[[i, j]] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let mut m = Array2::<Complex64>::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            let mut s = c(0.0, 0.0);
            for k in 0..dim {
                s += a[[i, k]] * a[[j, k]].conj();
            }
            m[[i, j]] = s;
        }
    }
    for i in 0..dim {
        m[[i, i]] += c(0.05 * dim as f64, 0.0);
    }
    let trace: f64 = (0..dim).map(|i| m[[i, i]].re).sum();
    m.mapv_inplace(|z| z / trace);
    DensityMatrix::new(m).unwrap()
}
