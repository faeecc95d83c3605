//! Point clouds and the oriented, curvature-annotated features extracted
//! from them.

pub mod cloud;
pub mod curvature;
pub mod features;
pub mod kdtree;
pub mod normals;

pub use cloud::PointCloud;
pub use curvature::{estimate_curvatures, PrincipalCurvature};
pub use features::{build_features, extract_features, frame_orientation, Extraction, SurfaceFeatureSet, DEFAULT_K_NN};
pub use kdtree::KdTree;
pub use normals::estimate_normals;
