use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input to an otherwise valid operation.
    #[error("input error: {0}")]
    Input(String),

    #[error("hyperparameter error: {0}")]
    Hyperparameter(String),

    #[error("config error: {0}")]
    Config(String),

    /// Factorization breakdown that survived jitter escalation.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("logic error: {0}")]
    Logic(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
