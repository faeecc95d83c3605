//! Hand kinematics, underactuation, trajectories, the equilibrium
//! configuration model and a kinematic closing generator.

mod closing;
mod collide;
mod config_model;
mod description;
mod state;

pub use closing::{approach_and_close, close_against_cloud, Closing, ClosingParams};
pub use collide::CloudCollider;
pub use config_model::{ConfigModel, DEFAULT_CONFIG_SIGMA};
pub use description::{HandDescription, Joint, Link};
pub use state::{HandState, Trajectory};
