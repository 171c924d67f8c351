use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] helix_core::Error),

    #[error("time step violates the stability limit: {0}")]
    Unstable(String),

    #[error("invalid simulation setup: {0}")]
    InvalidSetup(String),

    #[error("undefined quantity: {0}")]
    Undefined(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
