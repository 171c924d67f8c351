use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice parameters: {0}")]
    InvalidSpec(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver failed at k = ({kx:.6}, {ky:.6}) [2π/a0]: {reason}")]
    Eigen { kx: f64, ky: f64, reason: String },

    #[error("parity classification inconclusive: {0}")]
    Inconclusive(String),

    #[error("effective-index calibration failed: {0}")]
    Calibration(String),

    #[error("spin texture undefined: {0}")]
    UndefinedTexture(String),

    #[error("undefined quantity: {0}")]
    Undefined(String),

    #[error(
        "Zeeman splitting {splitting_ghz:.3} GHz is below the {resolution_ghz:.3} GHz resolution"
    )]
    Unresolved {
        splitting_ghz: f64,
        resolution_ghz: f64,
    },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
