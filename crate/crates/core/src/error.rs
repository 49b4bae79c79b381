use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator, the learner and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A gate parameter left the range where truncation stays controlled.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that stem from the numerics rather than from input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::NumericalDegeneracy(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
