use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the walk laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid coin: {0}")]
    InvalidCoin(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("subsequence is not in J: relative-gap estimate {q} is not finite")]
    NotInJ { q: f64 },

    #[error("window [{lo}, {hi}] is not block-aligned: {reason}")]
    Alignment { lo: i64, hi: i64, reason: String },

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
