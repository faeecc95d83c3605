//! File formats, training and inference drivers, synthetic data and the CLI.

pub mod archive;
pub mod cli;
pub mod config;
pub mod infer;
pub mod synth;
pub mod train;

pub use archive::{ModelArchive, ARCHIVE_VERSION};
pub use config::{Eta, LearningParams, RunConfig};
pub use infer::{grasp_list_json, infer_cloud};
pub use synth::{parse_list, scan, ScanParams, Shape};
pub use train::{learn_example, object_model, train, Example};
