//! Poses, the factorised feature kernel and weighted particle densities.

pub mod density;
pub mod kernel;
pub mod pose;

pub use density::{kernel, log_kernel, perturb_pose, ConditionalDensity, Density, Feature};
pub use kernel::{log_bessel_i1, log_sum_exp, log_theta, log_vmf_normalizer, sample_antipodal_vmf, theta, Bandwidth};
pub use pose::{quat_dot, rotation_angle, Pose};
