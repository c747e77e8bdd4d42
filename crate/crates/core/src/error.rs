use std::path::PathBuf;

use thiserror::Error;

/// Failures of the weighted least-squares solve and the mounting transforms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("underdetermined: {weighted} point(s) with positive weight, need at least 2")]
    Underdetermined { weighted: usize },
    #[error("normal matrix ill-conditioned (condition number {condition:.3e} > {limit:.3e})")]
    IllConditioned { condition: f64, limit: f64 },
    #[error("degenerate extrinsics: longitudinal mounting offset x must be non-zero")]
    DegenerateExtrinsics,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Solver(#[from] SolverError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: malformed record: {message}")]
    Format { context: String, message: String },

    #[error("{what}: unsupported format version {found} (expected {expected})")]
    Version {
        what: &'static str,
        found: u32,
        expected: u32,
    },

    #[error("invalid configuration value for `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("trajectory length {length:.2} m is shorter than one {segment:.1} m segment")]
    TrajectoryTooShort { length: f64, segment: f64 },

    #[error("frame {frame} has no odometry and no external odometry source was supplied")]
    MissingOdometry { frame: usize },

    #[error("frame {frame} has no ground-truth labels")]
    MissingGroundTruth { frame: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
