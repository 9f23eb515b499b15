//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// Too few observations for the requested computation.
    #[error("insufficient data for {op}: need {need}, got {got}")]
    InsufficientData {
        op: &'static str,
        need: usize,
        got: usize,
    },

    /// Malformed caller input (mismatched lengths, empty grids, bad flags).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numerical routine failed to converge or produced a non-finite value.
    #[error("numerical failure in {op}: {detail}")]
    Numerical { op: &'static str, detail: String },

    /// A P-value file could not be parsed; carries the 1-based line number.
    #[error("{path}:{line}: {detail}")]
    Parse {
        path: PathBuf,
        line: usize,
        detail: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn numerical(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            op,
            detail: detail.into(),
        }
    }
}
