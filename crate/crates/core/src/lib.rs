//! Grasp learning and transfer for underactuated hands.
//!
//! Example grasps are recorded as point clouds plus reach-to-grasp
//! trajectories. Training turns them into per-link contact models (densities
//! over link poses relative to curvature-annotated surface frames) and a
//! hand-configuration model. Inference composes the contact models with a
//! new object's surface density, seeds candidate equilibrium grasps, attaches
//! warped reach trajectories and refines everything by simulated annealing.

pub mod app;
pub mod error;
pub mod geom;
pub mod object_model;
pub mod contact;
pub mod hand;
pub mod inference;
pub mod surface;

pub use error::{Error, Result};
