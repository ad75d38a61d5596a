//! Error type shared by all operations in this crate.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification of an error, used by callers (e.g. the CLI) to
/// pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// The caller asked for something invalid (bad parameter, missing resource).
    Usage,
    /// The input data could not be read or parsed, or is inconsistent.
    Data,
    /// A numerical routine failed to produce a usable result.
    Numerical,
}

/// All failure modes surfaced by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        /// 1-based line number within the file.
        line: usize,
        msg: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("word not in vocabulary: {0:?}")]
    WordNotFound(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Map the error onto a coarse category.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidParam(_) | Error::WordNotFound(_) => ErrorCategory::Usage,
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::EmptyInput(_)
            | Error::DimensionMismatch(_)
            | Error::Degenerate(_) => ErrorCategory::Data,
            Error::Numerical(_) => ErrorCategory::Numerical,
        }
    }
}
