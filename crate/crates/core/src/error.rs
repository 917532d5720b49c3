use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the scoring pipeline.
#[derive(Debug, Error)]
pub enum OtError {
    /// Inconsistent dimensions or invalid parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// Non-finite values, zero-norm rows, empty inputs.
    #[error("data error: {0}")]
    Data(String),

    /// Malformed feature, score or label file.
    #[error("format error: {0}")]
    Format(String),

    #[error("numerical stability error: {0}")]
    Stability(String),

    /// A plan column carries no mass, so no conditional distribution exists.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("singular covariance: {0}")]
    Singular(String),

    #[error("metric undefined: {0}")]
    MetricUndefined(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl OtError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        OtError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = OtError> = std::result::Result<T, E>;
