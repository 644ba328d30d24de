use std::path::PathBuf;

use crate::ledger::PolicyViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    Dimension(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot partition {records} records into {parts} parts: each part would hold {per_part} records but must hold more than the {attributes} attributes (c > a)")]
    Partition {
        records: usize,
        parts: usize,
        per_part: usize,
        attributes: usize,
    },

    #[error("subset index {index} out of range 1..={m}")]
    SubsetIndex { index: usize, m: usize },

    #[error("release policy violated for subsets ({i}, {j}): {violations:?}")]
    Policy {
        i: usize,
        j: usize,
        violations: Vec<PolicyViolation>,
    },

    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
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

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Whether the error reflects a violated precondition on otherwise
    /// well-formed input, as opposed to I/O or parse failures.
    pub fn is_precondition(&self) -> bool {
        !matches!(
            self,
            Error::Io { .. } | Error::Parse { .. } | Error::Format { .. }
        )
    }
}
