use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geom::density::pick_cumulative;
use crate::geom::log_sum_exp;
use crate::hand::{HandState, Trajectory};

/// Scales of the distance used to pick a reach trajectory for a candidate
/// equilibrium: wrist position (m), wrist angle (rad), joint vector (rad).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionScales {
    pub position: f64,
    pub orientation: f64,
    pub config: f64,
}

impl Default for SelectionScales {
    fn default() -> Self {
        Self {
            position: 0.05,
            orientation: 0.5,
            config: 0.5,
        }
    }
}

impl SelectionScales {
    /// Squared scaled distance between two equilibrium states.
    pub fn distance_sq(&self, a: &HandState, b: &HandState) -> f64 {
        let dp = (a.wrist.position - b.wrist.position).norm_squared();
        let angle = a.wrist.angle_to(&b.wrist);
        let dc: f64 = a.config.iter().zip(&b.config).map(|(x, y)| (x - y) * (x - y)).sum();
        dp / (self.position * self.position)
            + angle * angle / (self.orientation * self.orientation)
            + dc / (self.config * self.config)
    }

    /// Selection probabilities `∝ exp(−d²/2)` of each trajectory.
    pub fn probabilities(&self, candidate: &HandState, trajectories: &[Trajectory]) -> Vec<f64> {
        let logits: Vec<f64> = trajectories
            .iter()
            .map(|t| -0.5 * self.distance_sq(candidate, t.equilibrium()))
            .collect();
        let total = log_sum_exp(logits.iter().copied());
        if !total.is_finite() {
            return vec![1.0 / trajectories.len() as f64; trajectories.len()];
        }
        logits.iter().map(|l| (l - total).exp()).collect()
    }
}

/// Index of a reach trajectory drawn from a Gaussian centred on the
/// candidate equilibrium. Panics on an empty trajectory list.
pub fn select_reach_trajectory<R: Rng + ?Sized>(
    candidate: &HandState,
    trajectories: &[Trajectory],
    scales: &SelectionScales,
    rng: &mut R,
) -> usize {
    assert!(!trajectories.is_empty(), "no reach trajectories to choose from");
    if trajectories.len() == 1 {
        return 0;
    }
    let mut acc = 0.0;
    let cumulative: Vec<f64> = scales
        .probabilities(candidate, trajectories)
        .into_iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    pick_cumulative(&cumulative, rng)
}

/// Re-anchors a training trajectory on a candidate equilibrium.
///
/// Wrist poses keep their offset from the training equilibrium wrist, now
/// applied to the candidate's wrist. The joint offset to the candidate is
/// blended in linearly over the normalized step index. The motor signal is
/// copied as is. The final state's wrist and joints are the candidate's.
pub fn warp_trajectory(trajectory: &Trajectory, candidate: &HandState) -> Trajectory {
    let eq = trajectory.equilibrium();
    let to_local = eq.wrist.inverse();
    let offset: Vec<f64> = candidate.config.iter().zip(&eq.config).map(|(c, e)| c - e).collect();
    let n = trajectory.len();
    let last = n - 1;
    let states = trajectory
        .states()
        .iter()
        .enumerate()
        .map(|(t, s)| {
            if t == last {
                return HandState::new(candidate.wrist, candidate.config.clone(), s.motor);
            }
            let alpha = t as f64 / last as f64;
            let wrist = candidate.wrist.compose(&to_local.compose(&s.wrist));
            let config = s.config.iter().zip(&offset).map(|(c, d)| c + alpha * d).collect();
            HandState::new(wrist, config, s.motor)
        })
        .collect();
    Trajectory::new(trajectory.times().to_vec(), states).expect("warping keeps a valid trajectory")
}
