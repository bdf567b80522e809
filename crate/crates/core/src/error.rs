use std::path::PathBuf;

use thiserror::Error;

/// Failure while decoding an image or map file.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: unsupported format (magic {magic:?})")]
    UnsupportedFormat { path: PathBuf, magic: String },
    #[error("{path}: malformed header: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },
    #[error("{path}: truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("{path}: malformed payload: {reason}")]
    MalformedPayload { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("config: {0}")]
    Config(String),
    #[error("calibration: {0}")]
    Calibration(String),
    #[error("degenerate weights: total weight over {pixels} contributing pixels is zero")]
    DegenerateWeights { pixels: usize },
    #[error("evaluation: {0}")]
    Evaluation(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
