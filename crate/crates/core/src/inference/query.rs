use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::density::{log_pose_kernel, pick_cumulative, KernelConstants};
use crate::geom::{log_sum_exp, perturb_pose, Bandwidth, Density, Pose};

/// Weighted kernel set over world poses of one link on a query object.
#[derive(Clone, Debug)]
pub struct QueryDensity {
    link: usize,
    poses: Vec<Pose>,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    cumulative: Vec<f64>,
    bandwidth: Bandwidth,
    consts: KernelConstants,
}

impl QueryDensity {
    /// Builds a query density from log weights, normalizing them.
    pub fn from_log_weights(link: usize, poses: Vec<Pose>, log_weights: Vec<f64>, bandwidth: Bandwidth) -> Result<Self> {
        bandwidth.validate()?;
        if poses.len() != log_weights.len() {
            return Err(Error::invalid(
                "query density",
                format!("{} poses but {} weights", poses.len(), log_weights.len()),
            ));
        }
        let total = log_sum_exp(log_weights.iter().copied());
        if !total.is_finite() {
            return Err(Error::DegenerateQuery { link });
        }
        let log_weights: Vec<f64> = log_weights.iter().map(|lw| lw - total).collect();
        let weights: Vec<f64> = log_weights.iter().map(|lw| lw.exp()).collect();
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(Self {
            link,
            poses,
            weights,
            log_weights,
            cumulative,
            consts: KernelConstants::new(&bandwidth),
            bandwidth,
        })
    }

    pub fn link(&self) -> usize {
        self.link
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bandwidth(&self) -> &Bandwidth {
        &self.bandwidth
    }

    /// `ln Σ w_j N₃(p | p̂_j, σ_p) Θ(q | q̂_j, σ_q)`.
    pub fn log_eval(&self, pose: &Pose) -> f64 {
        log_sum_exp(
            self.poses
                .iter()
                .zip(&self.log_weights)
                .map(|(s, lw)| lw + log_pose_kernel(pose, s, &self.bandwidth, &self.consts)),
        )
    }

    pub fn eval(&self, pose: &Pose) -> f64 {
        self.log_eval(pose).exp()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Pose {
        let j = pick_cumulative(&self.cumulative, rng);
        perturb_pose(&self.poses[j], &self.bandwidth, rng)
    }
}

/// Composes a contact model with an object model into a query density of
/// `k_q` kernels.
///
/// Each kernel draws a feature `(v, r)` from the object model, a relative
/// pose `u` from the contact model conditioned on `r`, and sits at `v ∘ u`
/// with weight proportional to the contact model's curvature marginal at `r`.
/// Draws whose curvature has no support under the contact model get zero
/// weight and are dropped.
pub fn compute_query_density<R: Rng + ?Sized>(
    contact: &Density,
    object: &Density,
    k_q: usize,
    link: usize,
    rng: &mut R,
) -> Result<QueryDensity> {
    if k_q == 0 {
        return Err(Error::invalid("query density", "needs at least one kernel"));
    }
    let mut poses = Vec::with_capacity(k_q);
    let mut log_weights = Vec::with_capacity(k_q);
    for _ in 0..k_q {
        let v = object.sample(rng);
        let Ok(conditional) = contact.conditional(&v.curvature) else {
            continue;
        };
        let u = conditional.sample(rng);
        poses.push(v.pose.compose(&u));
        log_weights.push(contact.log_marginal_curvature(&v.curvature));
    }
    if poses.is_empty() {
        return Err(Error::DegenerateQuery { link });
    }
    QueryDensity::from_log_weights(link, poses, log_weights, *contact.bandwidth())
}
