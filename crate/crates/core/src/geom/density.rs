use nalgebra::Vector3;
use rand::Rng;
use rand_distr::StandardNormal;

use super::kernel::{log_cosh, log_gaussian, log_sum_exp, log_vmf_normalizer, sample_antipodal_vmf, Bandwidth};
use super::pose::{quat_dot, Pose};
use crate::error::{Error, Result};

/// A surface feature: a pose paired with principal curvatures `r₁ ≥ r₂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Feature {
    pub pose: Pose,
    pub curvature: [f64; 2],
}

impl Feature {
    /// Orders the curvature pair so that `r₁ ≥ r₂`.
    pub fn new(pose: Pose, curvature: [f64; 2]) -> Self {
        let [a, b] = curvature;
        let curvature = if a >= b { [a, b] } else { [b, a] };
        Self { pose, curvature }
    }

    pub fn try_new(pose: Pose, curvature: [f64; 2]) -> Result<Self> {
        if curvature.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("feature", format!("non-finite curvature {curvature:?}")));
        }
        Ok(Self::new(pose, curvature))
    }
}

#[inline]
fn curvature_dist_sq(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    d0 * d0 + d1 * d1
}

/// Precomputed log normalizers of the three kernel factors.
#[derive(Clone, Copy, Debug)]
pub(crate) struct KernelConstants {
    pub position: f64,
    pub orientation: f64,
    pub curvature: f64,
}

impl KernelConstants {
    pub fn new(bw: &Bandwidth) -> Self {
        Self {
            position: log_gaussian(0.0, bw.position, 3),
            orientation: log_vmf_normalizer(bw.orientation),
            curvature: log_gaussian(0.0, bw.curvature, 2),
        }
    }
}

/// Log of the pose part `N₃(p|μ_p, σ_p) Θ(q|μ_q, σ_q)` of the kernel.
#[inline]
pub(crate) fn log_pose_kernel(x: &Pose, mean: &Pose, bw: &Bandwidth, c: &KernelConstants) -> f64 {
    let d2 = (x.position - mean.position).norm_squared();
    let dot = quat_dot(&x.orientation, &mean.orientation);
    c.position - 0.5 * d2 / (bw.position * bw.position) + c.orientation + log_cosh(bw.orientation * dot)
}

#[inline]
fn log_curvature_kernel(r: &[f64; 2], mean: &[f64; 2], bw: &Bandwidth, c: &KernelConstants) -> f64 {
    c.curvature - 0.5 * curvature_dist_sq(r, mean) / (bw.curvature * bw.curvature)
}

/// Log of the factorised kernel `K(x | μ, σ)`.
pub fn log_kernel(x: &Feature, mean: &Feature, bw: &Bandwidth) -> f64 {
    let c = KernelConstants::new(bw);
    log_pose_kernel(&x.pose, &mean.pose, bw, &c) + log_curvature_kernel(&x.curvature, &mean.curvature, bw, &c)
}

pub fn kernel(x: &Feature, mean: &Feature, bw: &Bandwidth) -> f64 {
    log_kernel(x, mean, bw).exp()
}

/// Weighted particle density over SE(3) × R².
///
/// Immutable once built. Every evaluation runs in log space and only the
/// public linear-space accessors exponentiate.
#[derive(Clone, Debug)]
pub struct Density {
    particles: Vec<Feature>,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    cumulative: Vec<f64>,
    bandwidth: Bandwidth,
    consts: KernelConstants,
}

impl Density {
    /// Builds a density from weights that already sum to one within 1e-9.
    /// Weights are stored as given.
    pub fn new(particles: Vec<Feature>, weights: Vec<f64>, bandwidth: Bandwidth) -> Result<Self> {
        bandwidth.validate()?;
        if particles.is_empty() {
            return Err(Error::invalid("density", "needs at least one particle"));
        }
        if particles.len() != weights.len() {
            return Err(Error::invalid(
                "density",
                format!("{} particles but {} weights", particles.len(), weights.len()),
            ));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::invalid("density", format!("weight {w} is not a non-negative number")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("density", format!("weights sum to {total}, not 1")));
        }
        let log_weights = weights.iter().map(|w| w.ln()).collect();
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(Self {
            particles,
            weights,
            log_weights,
            cumulative,
            consts: KernelConstants::new(&bandwidth),
            bandwidth,
        })
    }

    /// Builds a density from arbitrary non-negative weights, normalizing them.
    pub fn from_unnormalized(particles: Vec<Feature>, weights: Vec<f64>, bandwidth: Bandwidth) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::invalid("density", format!("weights sum to {total}")));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Self::new(particles, weights, bandwidth)
    }

    pub fn uniform(particles: Vec<Feature>, bandwidth: Bandwidth) -> Result<Self> {
        let w = 1.0 / particles.len().max(1) as f64;
        let weights = vec![w; particles.len()];
        Self::new(particles, weights, bandwidth)
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[Feature] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bandwidth(&self) -> &Bandwidth {
        &self.bandwidth
    }

    pub fn log_eval(&self, x: &Feature) -> f64 {
        log_sum_exp(self.particles.iter().zip(&self.log_weights).map(|(p, lw)| {
            lw + log_pose_kernel(&x.pose, &p.pose, &self.bandwidth, &self.consts)
                + log_curvature_kernel(&x.curvature, &p.curvature, &self.bandwidth, &self.consts)
        }))
    }

    /// `pdf(x) = Σ w_j K(x | x_j, σ)`.
    pub fn eval(&self, x: &Feature) -> f64 {
        self.log_eval(x).exp()
    }

    fn log_curvature_terms(&self, r: &[f64; 2]) -> Vec<f64> {
        self.particles
            .iter()
            .zip(&self.log_weights)
            .map(|(p, lw)| lw + log_curvature_kernel(r, &p.curvature, &self.bandwidth, &self.consts))
            .collect()
    }

    pub fn log_marginal_curvature(&self, r: &[f64; 2]) -> f64 {
        log_sum_exp(self.log_curvature_terms(r))
    }

    /// Curvature marginal `pdf(r) = Σ w_j N₂(r | r_j, σ_r)`.
    pub fn marginal_curvature(&self, r: &[f64; 2]) -> f64 {
        self.log_marginal_curvature(r).exp()
    }

    /// Particle weights of the pose density conditioned on curvature `r`.
    ///
    /// Fails when the linear-space marginal at `r` underflows to zero.
    pub fn conditional_weights(&self, r: &[f64; 2]) -> Result<Vec<f64>> {
        let terms = self.log_curvature_terms(r);
        let log_marginal = log_sum_exp(terms.iter().copied());
        if log_marginal.exp() == 0.0 {
            return Err(Error::DegenerateConditional { r: *r });
        }
        Ok(terms.iter().map(|t| (t - log_marginal).exp()).collect())
    }

    pub fn conditional(&self, r: &[f64; 2]) -> Result<ConditionalDensity<'_>> {
        let weights = self.conditional_weights(r)?;
        Ok(ConditionalDensity::new(self, weights))
    }

    /// Log of the pose-only kernel sum under caller-supplied weights.
    pub fn log_eval_pose_weighted(&self, pose: &Pose, weights: &[f64]) -> f64 {
        log_sum_exp(
            self.particles
                .iter()
                .zip(weights)
                .filter(|(_, w)| **w > 0.0)
                .map(|(p, w)| w.ln() + log_pose_kernel(pose, &p.pose, &self.bandwidth, &self.consts)),
        )
    }

    fn pick_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        pick_cumulative(&self.cumulative, rng)
    }

    /// Draws one feature: a particle chosen by weight, then perturbed by
    /// the kernel in every factor.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Feature {
        self.sample_indexed(rng).1
    }

    pub fn sample_indexed<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, Feature) {
        let j = self.pick_index(rng);
        let base = &self.particles[j];
        let pose = perturb_pose(&base.pose, &self.bandwidth, rng);
        let s = self.bandwidth.curvature;
        let r = [
            base.curvature[0] + s * rng.sample::<f64, _>(StandardNormal),
            base.curvature[1] + s * rng.sample::<f64, _>(StandardNormal),
        ];
        (j, Feature::new(pose, r))
    }
}

/// Pose-only view of a [`Density`] reweighted by a curvature conditional.
#[derive(Clone, Debug)]
pub struct ConditionalDensity<'a> {
    density: &'a Density,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl<'a> ConditionalDensity<'a> {
    fn new(density: &'a Density, weights: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self {
            density,
            weights,
            cumulative,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn eval(&self, pose: &Pose) -> f64 {
        self.density.log_eval_pose_weighted(pose, &self.weights).exp()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Pose {
        let j = pick_cumulative(&self.cumulative, rng);
        perturb_pose(&self.density.particles[j].pose, &self.density.bandwidth, rng)
    }
}

pub(crate) fn pick_cumulative<R: Rng + ?Sized>(cumulative: &[f64], rng: &mut R) -> usize {
    let total = *cumulative.last().expect("non-empty cumulative weights");
    let u = rng.random::<f64>() * total;
    cumulative.partition_point(|c| *c <= u).min(cumulative.len() - 1)
}

/// Pose drawn from `N₃(μ_p, σ_p) × Θ(μ_q, σ_q)`.
pub fn perturb_pose<R: Rng + ?Sized>(mean: &Pose, bw: &Bandwidth, rng: &mut R) -> Pose {
    let s = bw.position;
    let dp = Vector3::new(
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
    ) * s;
    Pose {
        position: mean.position + dp,
        orientation: sample_antipodal_vmf(&mean.orientation, bw.orientation, rng),
    }
}
