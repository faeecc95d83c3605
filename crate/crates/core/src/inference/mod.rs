//! Grasp inference on a query object: query densities, seeding, reach
//! trajectories, likelihoods and simulated annealing.

mod anneal;
mod likelihood;
mod model;
mod pipeline;
mod query;
mod reach;
mod seed;

pub use anneal::{anneal, rank_and_prune, Aabb, AnnealOutput, AnnealParams, Chain, GraspCandidate, Problem, TypeContext};
pub use likelihood::{
    collision_expert, collision_from_penetration, log_grasp_likelihood, log_query_factor, normalized_log_likelihood,
    score_candidate, trajectory_penetration, Likelihood,
};
pub use model::GraspTypeModel;
pub use pipeline::{build_queries, infer, Inference, InferenceParams};
pub use query::{compute_query_density, QueryDensity};
pub use reach::{select_reach_trajectory, warp_trajectory, SelectionScales};
pub use seed::{seed_grasp, wrist_for_link, Seed, SEED_ATTEMPTS};
