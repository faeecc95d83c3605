use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid {what}: {msg}")]
    Invalid { what: &'static str, msg: String },

    #[error("point cloud contains no points")]
    EmptyCloud,

    #[error("feature set is empty")]
    EmptyFeatures,

    #[error("ambiguous normal at point {index}: the two smallest covariance eigenvalues coincide")]
    DegenerateNeighborhood { index: usize },

    #[error("rank-deficient quadric fit at point {index} (condition number {condition:.3e})")]
    RankDeficientFit { index: usize, condition: f64 },

    #[error("curvature marginal underflows to zero at r = ({}, {})", r[0], r[1])]
    DegenerateConditional { r: [f64; 2] },

    #[error("expected a joint vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("joint {joint} at {value} rad is outside its limits [{lo}, {hi}]")]
    JointLimit {
        joint: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("every contact model norm is zero; no link touches any example")]
    NoContacts,

    #[error("link {link} is selected but its mixed contact model is empty")]
    EmptyMixture { link: usize },

    #[error("query density for link {link} is degenerate: no curvature overlap between object and contact model")]
    DegenerateQuery { link: usize },

    #[error("grasp type {grasp_type:?} has no usable contact models")]
    NoContactModels { grasp_type: String },

    #[error("could not sample an in-limit hand configuration after {attempts} attempts")]
    SeedRetries { attempts: usize },

    #[error("population is empty after selection: every candidate has zero likelihood")]
    EmptyPopulation,

    #[error("model archive has format version {found}, this build reads version {expected}")]
    ArchiveVersion { found: u32, expected: u32 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, msg: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the learned models not supporting the
    /// query, as opposed to unreadable or malformed inputs.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::DegenerateConditional { .. }
                | Error::DegenerateQuery { .. }
                | Error::NoContacts
                | Error::EmptyMixture { .. }
                | Error::NoContactModels { .. }
                | Error::EmptyPopulation
                | Error::SeedRetries { .. }
        )
    }
}
