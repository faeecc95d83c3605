use super::query::QueryDensity;
use crate::geom::Pose;
use crate::hand::{CloudCollider, ConfigModel, HandDescription, HandState, Trajectory};

/// `Σ_i ln Q_i(pose of link i)` over the modelled links.
pub fn log_query_factor(link_poses: &[Pose], queries: &[QueryDensity]) -> f64 {
    queries.iter().map(|q| q.log_eval(&link_poses[q.link()])).sum()
}

/// `ln C(h_c) + Σ_i ln Q_i(k_i(h_w, h_c))`.
pub fn log_grasp_likelihood(
    state: &HandState,
    queries: &[QueryDensity],
    config: &ConfigModel,
    hand: &HandDescription,
) -> f64 {
    let log_config = config.log_eval(&state.config);
    if log_config == f64::NEG_INFINITY {
        return log_config;
    }
    log_config + log_query_factor(&state.link_poses(hand), queries)
}

/// Deepest penetration of any link into the cloud along a trajectory.
pub fn trajectory_penetration(trajectory: &Trajectory, collider: &CloudCollider, hand: &HandDescription) -> f64 {
    trajectory
        .states()
        .iter()
        .map(|s| collider.hand_penetration(hand, &s.link_poses(hand)))
        .fold(0.0, f64::max)
}

/// Soft collision penalty `exp(−β d)` from a penetration depth.
pub fn collision_from_penetration(depth: f64, beta: f64) -> f64 {
    (-beta * depth.max(0.0)).exp()
}

pub fn collision_expert(trajectory: &Trajectory, collider: &CloudCollider, hand: &HandDescription, beta: f64) -> f64 {
    collision_from_penetration(trajectory_penetration(trajectory, collider, hand), beta)
}

/// Log factors of a candidate's likelihood.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Likelihood {
    pub log_collision: f64,
    pub log_config: f64,
    pub log_query: f64,
    /// Number of query factors in `log_query`.
    pub num_queries: usize,
}

impl Likelihood {
    pub fn log_raw(&self) -> f64 {
        self.log_collision + self.log_config + self.log_query
    }

    pub fn raw(&self) -> f64 {
        self.log_raw().exp()
    }

    /// Raises the query part to `max_queries / num_queries` so grasp types
    /// with different numbers of modelled links compete on equal terms.
    pub fn log_normalized(&self, max_queries: usize) -> f64 {
        normalized_log_likelihood(self.log_collision, self.log_config, self.log_query, self.num_queries, max_queries)
    }

    pub fn normalized(&self, max_queries: usize) -> f64 {
        self.log_normalized(max_queries).exp()
    }
}

/// `ln L_coll + ln L_C + (n_max / n) ln L_Q`.
pub fn normalized_log_likelihood(
    log_collision: f64,
    log_config: f64,
    log_query: f64,
    num_queries: usize,
    max_queries: usize,
) -> f64 {
    assert!(num_queries >= 1, "normalization needs at least one query factor");
    let scaled = if log_query == f64::NEG_INFINITY {
        log_query
    } else {
        log_query * (max_queries as f64 / num_queries as f64)
    };
    log_collision + log_config + scaled
}

/// Scores a candidate: collision expert on its trajectory, configuration
/// model and query densities at its equilibrium state.
pub fn score_candidate(
    state: &HandState,
    trajectory: &Trajectory,
    queries: &[QueryDensity],
    config: &ConfigModel,
    collider: &CloudCollider,
    hand: &HandDescription,
    beta: f64,
) -> Likelihood {
    let log_collision = if beta == 0.0 {
        0.0
    } else {
        -beta * trajectory_penetration(trajectory, collider, hand)
    };
    Likelihood {
        log_collision,
        log_config: config.log_eval(&state.config),
        log_query: log_query_factor(&state.link_poses(hand), queries),
        num_queries: queries.len(),
    }
}
