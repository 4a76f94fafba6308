use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum OtError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-positive mass {value} at index {index}")]
    NonPositiveMass { index: usize, value: f64 },

    #[error("histogram sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("negative cost {value} at ({row}, {col})")]
    NegativeCost { row: usize, col: usize, value: f64 },

    #[error("non-finite input: {0}")]
    NonFiniteInput(String),

    #[error("regularizer {0} is not supported by this operation")]
    UnsupportedRegularizer(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid group structure: {0}")]
    InvalidGroups(String),

    #[error("instance with {cells} cells exceeds the exact solver limit of {limit}")]
    SizeLimitExceeded { cells: usize, limit: usize },

    #[error("reference quantity is zero")]
    ZeroReference,

    #[error("image has {distinct} distinct colors, fewer than k = {k}")]
    TooFewColors { distinct: usize, k: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = OtError> = std::result::Result<T, E>;
