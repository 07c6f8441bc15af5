use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero-width bounding box: all samples equal {0}")]
    DegenerateBox(f64),

    #[error("all {0} samples fall outside the grid box [{1}, {2}]")]
    NoSamplesInBox(usize, f64, f64),

    #[error("grid mismatch between densities")]
    GridMismatch,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("stencil has no density for {0}")]
    MissingStencilMember(String),

    #[error("field solver did not converge at any length scale ({0})")]
    NotConverged(String),

    #[error("calibration did not reach target epsilon {target} after {iterations} iterations")]
    CalibrationFailed {
        target: f64,
        iterations: usize,
        history: Vec<crate::fim::CalibrationStep>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
