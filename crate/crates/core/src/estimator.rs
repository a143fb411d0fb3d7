//! Maximum-likelihood reconstruction of the relaxation direction.
//!
//! Tomographic images taken at unknown points of a relaxation curve are
//! summarized by weighted first and second moments of their expectation
//! coordinates. The dominant generalized eigenvector of the covariance
//! against the BKM metric at the center of mass gives the direction of the
//! dissipative generator; the exponential arc through the center of mass
//! along that generator is the reconstructed constraint trajectory.

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Error;
use crate::exec::try_map_indices;
use crate::geometry::{bkm_matrix, f_from_state, CorrelationMatrix, FCoords};
use crate::linalg::{eigh_real, solve_lower_matrix, solve_lower_transpose};
use crate::states::{expectation, DensityMatrix, HermitianOperator, ObservableBasis};
use crate::trajectory::{match_expectation, trajectory_point, Trajectory};
use crate::Result;

/// Components of the direction below this magnitude are ignored when fixing
/// the overall sign.
const SIGN_TOL: f64 = 1e-9;

/// Relative spectral gap under which the dominant direction is flagged as
/// statistically unidentified.
const AMBIGUITY_GAP: f64 = 1e-9;

/// Seed of the fixed direction stream used by `likelihood_grid`; a given
/// direction index always denotes the same direction, so refining a grid
/// only appends rows.
const GRID_SEED: u64 = 0x9E37_79B9_7F4A_7C15;

/// A single tomographic snapshot: the estimated state and the number of
/// measurements it was built from.
#[derive(Debug, Clone)]
pub struct TomographicImage {
    state: DensityMatrix,
    sample_size: u64,
}

impl TomographicImage {
    /// Validates the sample size (the relative weights are `N_i / N`).
    pub fn new(state: DensityMatrix, sample_size: u64) -> Result<Self> {
        if sample_size == 0 {
            return Err(Error::InvalidSampleSize);
        }
        Ok(Self { state, sample_size })
    }

    /// The imaged state.
    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    /// Number of measurements behind the image.
    pub fn sample_size(&self) -> u64 {
        self.sample_size
    }
}

/// A weighted collection of tomographic images over a common basis.
#[derive(Debug, Clone)]
pub struct ImageSet {
    images: Vec<TomographicImage>,
    basis: ObservableBasis,
    total: u64,
}

impl ImageSet {
    /// Validates dimensions and requires at least two images; a covariance
    /// needs spread to exist.
    pub fn new(images: Vec<TomographicImage>, basis: ObservableBasis) -> Result<Self> {
        if images.len() < 2 {
            return Err(Error::TooFewImages {
                found: images.len(),
            });
        }
        for img in &images {
            if img.state.dim() != basis.dim() {
                return Err(Error::DimensionMismatch {
                    expected: basis.dim(),
                    found: img.state.dim(),
                });
            }
        }
        let total = images.iter().map(|img| img.sample_size).sum();
        Ok(Self {
            images,
            basis,
            total,
        })
    }

    /// The images.
    pub fn images(&self) -> &[TomographicImage] {
        &self.images
    }

    /// Common observable basis.
    pub fn basis(&self) -> &ObservableBasis {
        &self.basis
    }

    /// Total number of measurements `N`.
    pub fn total_samples(&self) -> u64 {
        self.total
    }

    /// Relative weights `w_i = N_i / N`.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.total as f64;
        self.images
            .iter()
            .map(|img| img.sample_size as f64 / n)
            .collect()
    }

    /// Expectation coordinates of every image, evaluated concurrently in a
    /// fixed order.
    pub fn f_vectors(&self) -> Result<Vec<FCoords>> {
        try_map_indices(self.images.len(), |i| {
            f_from_state(&self.basis, self.images[i].state())
        })
    }
}

/// Dominant generalized eigenvector of the covariance against the metric.
#[derive(Debug, Clone)]
pub struct DominantDirection {
    /// Direction coefficients, normalized to `ξᵀCξ = 1` with the first
    /// significant component positive.
    pub xi: Array1<f64>,
    /// Largest generalized eigenvalue, the Rayleigh quotient at the optimum.
    pub value: f64,
    /// Gap between the two largest generalized eigenvalues.
    pub spectral_gap: f64,
    /// True when the gap is too small to single out a direction.
    pub ambiguous: bool,
}

/// Full output of the reconstruction pipeline.
#[derive(Debug, Clone)]
pub struct EstimateResult {
    /// Estimated direction, normalized to `ξᵀCξ = 1` and sign-fixed.
    pub xi: Array1<f64>,
    /// Dissipative generator `G = −ξ^b F_b`.
    pub generator: HermitianOperator,
    /// Center of mass of the images.
    pub center_of_mass: DensityMatrix,
    /// The reconstructed curve: base at the center of mass, generator `G`.
    pub constraint: Trajectory,
    /// Largest generalized eigenvalue `θ_max = ⟨Γ⟩_ξ`.
    pub top_eigenvalue: f64,
    /// Maximized log-likelihood `(N/2)·θ_max`, additive constants dropped.
    pub log_likelihood: f64,
    /// Gap between the two largest generalized eigenvalues.
    pub spectral_gap: f64,
    /// True when the direction is statistically unidentified.
    pub ambiguous: bool,
}

/// One row of a likelihood landscape.
#[derive(Debug, Clone)]
pub struct GridRow {
    /// Index into the fixed direction stream.
    pub index: usize,
    /// Unit direction in coefficient space.
    pub xi: Array1<f64>,
    /// Log-likelihood of the data under this direction.
    pub log_likelihood: f64,
}

/// Shared per-set quantities: moments of the image coordinates and the
/// metric at the center of mass.
struct SetContext {
    mean_f: Array1<f64>,
    gamma: Array2<f64>,
    center: DensityMatrix,
    metric: CorrelationMatrix,
}

impl SetContext {
    fn new(set: &ImageSet) -> Result<Self> {
        let weights = set.weights();
        let f_vectors = set.f_vectors()?;
        let k = set.basis().len();
        let mut mean_f = Array1::zeros(k);
        for (w, f) in weights.iter().zip(&f_vectors) {
            mean_f += &(f.values() * *w);
        }
        let mut gamma = Array2::zeros((k, k));
        for (w, f) in weights.iter().zip(&f_vectors) {
            let dev = f.values() - &mean_f;
            for a in 0..k {
                for b in 0..k {
                    gamma[[a, b]] += w * dev[a] * dev[b];
                }
            }
        }
        let center = center_of_mass(set)?;
        let metric = bkm_matrix(set.basis(), &center)?;
        Ok(Self {
            mean_f,
            gamma,
            center,
            metric,
        })
    }

    /// Rayleigh quotient `⟨Γ⟩_ξ = ξᵀΓξ / ξᵀCξ`.
    fn rayleigh(&self, xi: &Array1<f64>) -> f64 {
        let num = xi.dot(&self.gamma.dot(xi));
        num / self.metric.quadratic_form(xi)
    }

    /// Likelihood of the data for a direction and a proposed equilibrium
    /// state: `(N/2)[⟨Γ⟩_ξ − δfᵀ C⁻¹ δf]` with `δf` taken at the arc point
    /// matching the center-of-mass expectation of `G`.
    fn likelihood(
        &self,
        set: &ImageSet,
        xi: &Array1<f64>,
        sigma: &DensityMatrix,
    ) -> Result<f64> {
        let k = set.basis().len();
        if xi.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: xi.len(),
            });
        }
        let theta = self.rayleigh(xi);
        let generator = set.basis().assemble(&(-xi))?;
        let arc = Trajectory::new(sigma.clone(), generator.clone(), set.basis().clone())?;
        let target = expectation(&self.center, &generator)?;
        let (_, matched) = match_expectation(&arc, target)?;
        let delta = f_from_state(set.basis(), &matched)?.values() - &self.mean_f;
        let quad = delta.dot(&self.metric.solve(&delta)?);
        Ok(0.5 * set.total_samples() as f64 * (theta - quad))
    }
}

/// Weighted mixture of the images; rejected when it is not full-rank, since
/// every downstream step needs its logarithm.
pub fn center_of_mass(set: &ImageSet) -> Result<DensityMatrix> {
    let dim = set.basis().dim();
    let mut entries = Array2::zeros((dim, dim));
    for (w, img) in set.weights().iter().zip(set.images()) {
        entries += &(img.state().entries() * num_complex::Complex64::new(*w, 0.0));
    }
    let center = DensityMatrix::new(entries)?;
    if !center.is_full_rank() {
        return Err(Error::BoundaryState {
            min_eigenvalue: center.min_eigenvalue(),
        });
    }
    Ok(center)
}

/// Weighted covariance `Γ_ab = Σ_i w_i (f_a^i − f̄_a)(f_b^i − f̄_b)` of the
/// image coordinates: positive semidefinite with rank at most `m − 1`.
pub fn covariance_matrix(set: &ImageSet) -> Result<Array2<f64>> {
    let weights = set.weights();
    let f_vectors = set.f_vectors()?;
    let k = set.basis().len();
    let mut mean_f = Array1::zeros(k);
    for (w, f) in weights.iter().zip(&f_vectors) {
        mean_f += &(f.values() * *w);
    }
    let mut gamma = Array2::zeros((k, k));
    for (w, f) in weights.iter().zip(&f_vectors) {
        let dev = f.values() - &mean_f;
        for a in 0..k {
            for b in 0..k {
                gamma[[a, b]] += w * dev[a] * dev[b];
            }
        }
    }
    Ok(gamma)
}

/// Solves the generalized symmetric problem `Γ v = θ C v` and returns the
/// maximizer of the Rayleigh quotient.
///
/// The SPD metric is Cholesky-factored, `C = L Lᵀ`, reducing the problem to
/// an ordinary symmetric eigenproblem for `L⁻¹ Γ L⁻ᵀ`; the eigenvector `y`
/// maps back through `ξ = L⁻ᵀ y`, which lands exactly on the normalization
/// `ξᵀCξ = 1`. A vanishing covariance has no preferred direction and is
/// rejected; a near-degenerate top eigenvalue is flagged, not rejected.
pub fn dominant_direction(
    gamma: &Array2<f64>,
    metric: &CorrelationMatrix,
) -> Result<DominantDirection> {
    let k = metric.dim();
    if gamma.dim() != (k, k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: gamma.dim().0,
        });
    }
    let l = metric.cholesky_lower()?;
    // M = L⁻¹ Γ L⁻ᵀ, assembled by two triangular solves.
    let half = solve_lower_matrix(&l, gamma);
    let half_t = half.t().to_owned();
    let m = solve_lower_matrix(&l, &half_t);
    let m = (&m + &m.t()) * 0.5;
    let (vals, vecs) = eigh_real(&m)?;
    let top = vals[k - 1];
    if top <= 0.0 {
        return Err(Error::ZeroCovariance);
    }
    let gap = top - vals[k - 2];
    let y = vecs.column(k - 1).to_owned();
    let mut xi = solve_lower_transpose(&l, &y);
    // y is a unit vector, so ξᵀCξ = 1 already; renormalize to absorb the
    // round-off of the two solves.
    let norm = metric.quadratic_form(&xi).sqrt();
    xi.mapv_inplace(|v| v / norm);
    if let Some(first) = xi.iter().find(|v| v.abs() > SIGN_TOL) {
        if *first < 0.0 {
            xi.mapv_inplace(|v| -v);
        }
    }
    Ok(DominantDirection {
        xi,
        value: top,
        spectral_gap: gap,
        ambiguous: gap < AMBIGUITY_GAP * top,
    })
}

/// Log-likelihood of the image set under a direction `ξ` and equilibrium
/// candidate `σ`, additive data-only terms dropped.
pub fn log_likelihood(set: &ImageSet, xi: &Array1<f64>, sigma: &DensityMatrix) -> Result<f64> {
    let ctx = SetContext::new(set)?;
    ctx.likelihood(set, xi, sigma)
}

/// Runs the full reconstruction pipeline on an image set.
pub fn reconstruct(set: &ImageSet) -> Result<EstimateResult> {
    let ctx = SetContext::new(set)?;
    let dominant = dominant_direction(&ctx.gamma, &ctx.metric)?;
    let generator = set.basis().assemble(&(-&dominant.xi))?;
    let constraint = Trajectory::new(
        ctx.center.clone(),
        generator.clone(),
        set.basis().clone(),
    )?;
    // The arc passes through the center of mass, so δf = 0 and the
    // likelihood is the pure Rayleigh term.
    let log_likelihood = 0.5 * set.total_samples() as f64 * dominant.value;
    Ok(EstimateResult {
        xi: dominant.xi,
        generator,
        center_of_mass: ctx.center,
        constraint,
        top_eigenvalue: dominant.value,
        log_likelihood,
        spectral_gap: dominant.spectral_gap,
        ambiguous: dominant.ambiguous,
    })
}

/// Evaluates the likelihood over `count` quasi-uniform directions in
/// coefficient space.
///
/// Directions come from a fixed pseudorandom stream (standard normal
/// components, normalized), so row `i` is the same direction in every run
/// and for every `count`; the proposed equilibrium for each row sits on
/// that direction's arc through the center of mass, making the penalty term
/// vanish row-wise. Rows are evaluated concurrently.
pub fn likelihood_grid(set: &ImageSet, count: usize) -> Result<Vec<GridRow>> {
    if count == 0 {
        return Err(Error::InvalidConfig {
            reason: "direction count must be at least 1".into(),
        });
    }
    let k = set.basis().len();
    let mut rng = ChaCha8Rng::seed_from_u64(GRID_SEED);
    let mut directions = Vec::with_capacity(count);
    while directions.len() < count {
        let raw: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
        let dir = Array1::from_vec(raw);
        let norm = dir.dot(&dir).sqrt();
        if norm > 1e-6 {
            directions.push(dir / norm);
        }
    }
    let ctx = SetContext::new(set)?;
    try_map_indices(count, |i| {
        let xi = directions[i].clone();
        let generator = set.basis().assemble(&(-&xi))?;
        let arc = Trajectory::new(ctx.center.clone(), generator, set.basis().clone())?;
        let sigma = trajectory_point(&arc, 0.5)?;
        let log_likelihood = ctx.likelihood(set, &xi, &sigma)?;
        Ok(GridRow {
            index: i,
            xi,
            log_likelihood,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{gell_mann_basis, pauli_basis};
    use crate::trajectory::trajectory_from_endpoints;
    use ndarray::{arr1, array};
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bloch(x: f64, y: f64, z: f64) -> DensityMatrix {
        DensityMatrix::new(array![
            [c(0.5 * (1.0 + z), 0.0), c(0.5 * x, -0.5 * y)],
            [c(0.5 * x, 0.5 * y), c(0.5 * (1.0 - z), 0.0)]
        ])
        .unwrap()
    }

    fn image(state: DensityMatrix, n: u64) -> TomographicImage {
        TomographicImage::new(state, n).unwrap()
    }

    /// Images spread along a known qubit trajectory, exact states.
    fn arc_set() -> (ImageSet, HermitianOperator) {
        let basis = pauli_basis();
        let rho0 = bloch(0.6, 0.3, 0.2);
        let sigma = bloch(0.0, 0.0, -0.5);
        let traj = trajectory_from_endpoints(&rho0, &sigma, &basis).unwrap();
        let images: Vec<TomographicImage> = [0.0, 0.2, 0.4, 0.6, 0.8]
            .iter()
            .map(|&t| image(trajectory_point(&traj, t).unwrap(), 1000))
            .collect();
        let set = ImageSet::new(images, basis).unwrap();
        (set, traj.generator().clone())
    }

    #[test]
    fn center_of_mass_mixes_by_weight() {
        let basis = pauli_basis();
        let rho = bloch(0.3, -0.2, 0.1);
        let set = ImageSet::new(
            vec![image(rho.clone(), 100), image(rho.clone(), 100)],
            basis.clone(),
        )
        .unwrap();
        assert!(center_of_mass(&set).unwrap().distance(&rho) < 1e-14);

        let up = bloch(0.0, 0.0, 1.0);
        let down = bloch(0.0, 0.0, -1.0);
        let set = ImageSet::new(
            vec![image(up.clone(), 100), image(down.clone(), 100)],
            basis.clone(),
        )
        .unwrap();
        let mixed = center_of_mass(&set).unwrap();
        assert!(mixed.distance(&bloch(0.0, 0.0, 0.0)) < 1e-14);

        let a = bloch(0.4, 0.0, 0.0);
        let b = bloch(0.0, 0.4, 0.0);
        let set = ImageSet::new(vec![image(a, 300), image(b, 100)], basis).unwrap();
        let com = center_of_mass(&set).unwrap();
        assert!(com.distance(&bloch(0.3, 0.1, 0.0)) < 1e-14);
    }

    #[test]
    fn rank_deficient_center_is_rejected() {
        let basis = pauli_basis();
        let pure = bloch(0.0, 0.0, 1.0);
        let set = ImageSet::new(
            vec![image(pure.clone(), 10), image(pure, 10)],
            basis,
        )
        .unwrap();
        assert!(matches!(
            center_of_mass(&set).unwrap_err(),
            Error::BoundaryState { .. }
        ));
    }

    #[test]
    fn covariance_of_identical_images_vanishes() {
        let basis = pauli_basis();
        let rho = bloch(0.2, 0.1, -0.3);
        let set = ImageSet::new(
            vec![image(rho.clone(), 50), image(rho, 150)],
            basis,
        )
        .unwrap();
        let gamma = covariance_matrix(&set).unwrap();
        assert!(gamma.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn symmetric_pair_covariance_is_pure_yy() {
        let basis = pauli_basis();
        let eps = 0.05;
        let set = ImageSet::new(
            vec![
                image(bloch(0.5, eps, 0.0), 100),
                image(bloch(0.5, -eps, 0.0), 100),
            ],
            basis,
        )
        .unwrap();
        let gamma = covariance_matrix(&set).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let expected = if a == 1 && b == 1 { eps * eps } else { 0.0 };
                assert!((gamma[[a, b]] - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn covariance_rank_is_bounded_by_image_count() {
        let basis = pauli_basis();
        let set = ImageSet::new(
            vec![
                image(bloch(0.3, 0.1, 0.0), 100),
                image(bloch(0.1, -0.2, 0.3), 100),
                image(bloch(-0.2, 0.2, 0.1), 100),
            ],
            basis,
        )
        .unwrap();
        let gamma = covariance_matrix(&set).unwrap();
        // Three images give at most rank 2: the smallest eigenvalue is zero.
        let (vals, _) = crate::linalg::eigh_real(&gamma).unwrap();
        assert!(vals[0].abs() < 1e-15);
        assert!(vals[2] > 0.0);
    }

    #[test]
    fn identity_metric_reduces_to_pca() {
        let metric = CorrelationMatrix::new(Array2::eye(3)).unwrap();
        let gamma = Array2::from_diag(&arr1(&[1.0, 3.0, 0.5]));
        let dom = dominant_direction(&gamma, &metric).unwrap();
        assert!((dom.value - 3.0).abs() < 1e-12);
        assert!((dom.spectral_gap - 2.0).abs() < 1e-12);
        assert!(!dom.ambiguous);
        assert!((dom.xi[1] - 1.0).abs() < 1e-12);
        assert!(dom.xi[0].abs() < 1e-12 && dom.xi[2].abs() < 1e-12);
    }

    #[test]
    fn transverse_spread_tilts_toward_inverse_metric_column() {
        // Covariance purely along y at a center polarized at azimuth π/4:
        // the maximizer picks up an x component in the ratio of the inverse
        // metric entries.
        let basis = pauli_basis();
        let r = 0.5 / 2.0_f64.sqrt();
        let center = bloch(r, r, 0.0);
        let metric = bkm_matrix(&basis, &center).unwrap();
        let mut gamma = Array2::zeros((3, 3));
        gamma[[1, 1]] = 1e-4;
        let dom = dominant_direction(&gamma, &metric).unwrap();
        let inv_col = metric.solve(&arr1(&[0.0, 1.0, 0.0])).unwrap();
        let expected_ratio = inv_col[0] / inv_col[1];
        assert!(dom.xi[2].abs() < 1e-12);
        assert!((dom.xi[0] / dom.xi[1] - expected_ratio).abs() < 1e-10);
    }

    #[test]
    fn outer_product_covariance_recovers_its_direction() {
        let basis = pauli_basis();
        let metric = bkm_matrix(&basis, &bloch(0.3, -0.4, 0.2)).unwrap();
        let w = arr1(&[0.6, -0.3, 0.9]);
        let cw = metric.entries().dot(&w);
        let mut gamma = Array2::zeros((3, 3));
        for a in 0..3 {
            for b in 0..3 {
                gamma[[a, b]] = cw[a] * cw[b];
            }
        }
        let dom = dominant_direction(&gamma, &metric).unwrap();
        let scale = w[0] / dom.xi[0];
        for b in 0..3 {
            assert!((dom.xi[b] * scale - w[b]).abs() < 1e-9);
        }
        assert!((dom.value - w.dot(&metric.entries().dot(&w))).abs() < 1e-9);
    }

    #[test]
    fn zero_covariance_has_no_direction() {
        let metric = CorrelationMatrix::new(Array2::eye(3)).unwrap();
        let gamma = Array2::zeros((3, 3));
        assert!(matches!(
            dominant_direction(&gamma, &metric).unwrap_err(),
            Error::ZeroCovariance
        ));
    }

    #[test]
    fn isotropic_covariance_is_flagged_ambiguous() {
        let basis = pauli_basis();
        let metric = bkm_matrix(&basis, &bloch(0.2, 0.3, -0.1)).unwrap();
        let gamma = metric.entries().clone();
        let dom = dominant_direction(&gamma, &metric).unwrap();
        assert!(dom.ambiguous);
        assert!((dom.value - 1.0).abs() < 1e-10);
        assert!((metric.quadratic_form(&dom.xi) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_image_z_pair_reconstructs_z_direction() {
        let basis = pauli_basis();
        let eps = 0.1;
        let set = ImageSet::new(
            vec![
                image(bloch(0.0, 0.0, eps), 500),
                image(bloch(0.0, 0.0, -eps), 500),
            ],
            basis.clone(),
        )
        .unwrap();
        let est = reconstruct(&set).unwrap();
        assert!(est.center_of_mass.distance(&bloch(0.0, 0.0, 0.0)) < 1e-14);
        // At the maximally mixed state the metric is the identity, so this
        // is plain PCA along z.
        assert!(est.xi[0].abs() < 1e-10 && est.xi[1].abs() < 1e-10);
        assert!((est.xi[2] - 1.0).abs() < 1e-10);
        let sz = basis.get(2);
        let angle = crate::states::hilbert_schmidt_angle(&est.generator, sz).unwrap();
        assert!(angle < 1e-9);
        assert!((est.log_likelihood - 0.5 * 1000.0 * est.top_eigenvalue).abs() < 1e-9);
    }

    #[test]
    fn estimate_satisfies_normalization_and_centering() {
        let (set, _) = arc_set();
        let est = reconstruct(&set).unwrap();
        let metric = bkm_matrix(set.basis(), &est.center_of_mass).unwrap();
        assert!((metric.quadratic_form(&est.xi) - 1.0).abs() < 1e-10);
        // The constraint arc passes through the center of mass at t = 0.
        let target = expectation(&est.center_of_mass, &est.generator).unwrap();
        let (t, state) = match_expectation(&est.constraint, target).unwrap();
        assert!(t.abs() < 1e-9);
        assert!(state.distance(&est.center_of_mass) < 1e-9);
    }

    #[test]
    fn exact_arc_images_recover_the_generator_direction() {
        let (set, true_g) = arc_set();
        let est = reconstruct(&set).unwrap();
        let angle = crate::states::hilbert_schmidt_angle(&est.generator, &true_g).unwrap();
        assert!(angle < 0.05, "angle {angle}");
    }

    #[test]
    fn weight_split_and_permutation_leave_estimate_unchanged() {
        let basis = pauli_basis();
        let states = [
            bloch(0.4, 0.1, 0.05),
            bloch(0.3, 0.05, 0.0),
            bloch(0.2, 0.02, -0.05),
        ];
        let set = ImageSet::new(
            vec![
                image(states[0].clone(), 400),
                image(states[1].clone(), 200),
                image(states[2].clone(), 400),
            ],
            basis.clone(),
        )
        .unwrap();
        let est = reconstruct(&set).unwrap();

        let split = ImageSet::new(
            vec![
                image(states[0].clone(), 200),
                image(states[0].clone(), 200),
                image(states[1].clone(), 100),
                image(states[1].clone(), 100),
                image(states[2].clone(), 200),
                image(states[2].clone(), 200),
            ],
            basis.clone(),
        )
        .unwrap();
        let est_split = reconstruct(&split).unwrap();

        let permuted = ImageSet::new(
            vec![
                image(states[2].clone(), 400),
                image(states[0].clone(), 400),
                image(states[1].clone(), 200),
            ],
            basis,
        )
        .unwrap();
        let est_perm = reconstruct(&permuted).unwrap();

        for other in [&est_split, &est_perm] {
            for b in 0..3 {
                assert!((est.xi[b] - other.xi[b]).abs() < 1e-12);
            }
            assert!((est.top_eigenvalue - other.top_eigenvalue).abs() < 1e-12);
            assert!((est.log_likelihood - other.log_likelihood).abs() < 1e-9);
            assert!(est.center_of_mass.distance(&other.center_of_mass) < 1e-12);
        }
    }

    #[test]
    fn sample_scale_multiplies_likelihood_only() {
        let (set, _) = arc_set();
        let est = reconstruct(&set).unwrap();
        let scaled = ImageSet::new(
            set.images()
                .iter()
                .map(|img| image(img.state().clone(), img.sample_size() * 10))
                .collect(),
            set.basis().clone(),
        )
        .unwrap();
        let est10 = reconstruct(&scaled).unwrap();
        for b in 0..3 {
            assert!((est.xi[b] - est10.xi[b]).abs() < 1e-12);
        }
        assert!(est.center_of_mass.distance(&est10.center_of_mass) < 1e-14);
        assert!((est10.log_likelihood - 10.0 * est.log_likelihood).abs() < 1e-9);
    }

    #[test]
    fn likelihood_peaks_at_the_reconstructed_optimum() {
        let (set, _) = arc_set();
        let est = reconstruct(&set).unwrap();
        let n = set.total_samples() as f64;

        // Any sigma on the estimated arc reproduces the optimal value.
        let sigma_star = trajectory_point(&est.constraint, 0.3).unwrap();
        let l_star = log_likelihood(&set, &est.xi, &sigma_star).unwrap();
        assert!((l_star - est.log_likelihood).abs() < 1e-9 * n);

        // The likelihood is invariant under rescaling the direction.
        let l_scaled = log_likelihood(&set, &(&est.xi * 2.0), &sigma_star).unwrap();
        assert!((l_scaled - l_star).abs() < 1e-9 * n);

        // Off directions never beat the optimum.
        for raw in [[1.0, 0.0, 0.0], [0.4, -0.3, 0.8], [0.0, 1.0, -1.0]] {
            let xi = arr1(&raw);
            let gen = set.basis().assemble(&(-&xi)).unwrap();
            let arc = Trajectory::new(
                est.center_of_mass.clone(),
                gen,
                set.basis().clone(),
            )
            .unwrap();
            let sigma = trajectory_point(&arc, 0.5).unwrap();
            let l = log_likelihood(&set, &xi, &sigma).unwrap();
            assert!(l <= est.log_likelihood + 1e-9 * n);
        }
    }

    #[test]
    fn grid_rows_are_bounded_and_prefix_stable() {
        let (set, _) = arc_set();
        let est = reconstruct(&set).unwrap();
        let n = set.total_samples() as f64;
        let rows = likelihood_grid(&set, 16).unwrap();
        assert_eq!(rows.len(), 16);
        for row in &rows {
            assert!(row.log_likelihood <= est.log_likelihood + 1e-9 * n);
            let norm = row.xi.dot(&row.xi).sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        let shorter = likelihood_grid(&set, 8).unwrap();
        for (a, b) in shorter.iter().zip(&rows) {
            assert_eq!(a.index, b.index);
            for k in 0..3 {
                assert_eq!(a.xi[k], b.xi[k]);
            }
            assert_eq!(a.log_likelihood, b.log_likelihood);
        }
    }

    #[test]
    fn qutrit_pipeline_runs_end_to_end() {
        let basis = gell_mann_basis(3).unwrap();
        let a = basis
            .assemble(&arr1(&[0.3, -0.2, 0.5, 0.1, -0.4, 0.2, 0.3, -0.1]))
            .unwrap();
        let b = basis
            .assemble(&arr1(&[-0.1, 0.4, 0.2, -0.3, 0.1, 0.5, -0.2, 0.2]))
            .unwrap();
        let (rho0, _) = crate::states::matrix_exp_normalized(&a).unwrap();
        let (sigma, _) = crate::states::matrix_exp_normalized(&b).unwrap();
        let traj = trajectory_from_endpoints(&rho0, &sigma, &basis).unwrap();
        let images: Vec<TomographicImage> = [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&t| image(trajectory_point(&traj, t).unwrap(), 2000))
            .collect();
        let set = ImageSet::new(images, basis.clone()).unwrap();
        let est = reconstruct(&set).unwrap();
        let angle =
            crate::states::hilbert_schmidt_angle(&est.generator, traj.generator()).unwrap();
        assert!(angle < 0.05, "angle {angle}");
        let metric = bkm_matrix(&basis, &est.center_of_mass).unwrap();
        assert!((metric.quadratic_form(&est.xi) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn set_validation_rejects_bad_input() {
        let basis = pauli_basis();
        assert!(matches!(
            TomographicImage::new(bloch(0.0, 0.0, 0.0), 0).unwrap_err(),
            Error::InvalidSampleSize
        ));
        assert!(matches!(
            ImageSet::new(vec![image(bloch(0.1, 0.0, 0.0), 10)], basis.clone()).unwrap_err(),
            Error::TooFewImages { found: 1 }
        ));
        let q3 = DensityMatrix::new(ndarray::Array2::from_diag_elem(3, c(1.0 / 3.0, 0.0)))
            .unwrap();
        assert!(matches!(
            ImageSet::new(
                vec![image(bloch(0.1, 0.0, 0.0), 10), image(q3, 10)],
                basis
            )
            .unwrap_err(),
            Error::DimensionMismatch { .. }
        ));
    }
}
