use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidInput(String),

    #[error("covariance matrix is not positive definite (jitter {jitter:e})")]
    NotPositiveDefinite { jitter: f64 },

    #[error("hyperparameter fit failed: {0}")]
    FitFailed(String),

    #[error("missing artifact {0}")]
    MissingArtifact(String),

    #[error("malformed file {path}: {reason}")]
    Format { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
