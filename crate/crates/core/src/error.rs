use thiserror::Error;

/// Errors surfaced by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid mode {mode} for order-{order} tensor")]
    InvalidMode { mode: usize, order: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("identifiability violated: {0}")]
    Identifiability(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
