use thiserror::Error;

use crate::quaternion::Quaternion;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by the zero quaternion")]
    ZeroQuaternion,

    #[error("{0:?} is not a purely imaginary unit quaternion")]
    NotImaginaryUnit(Quaternion),

    #[error("ray parameter must be positive, got {0}")]
    NonPositiveRayParameter(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular")]
    Singular,

    /// A point of the S-spectrum was hit. `t` is the ray parameter when the
    /// point came from a ray scan, otherwise the modulus of `s`.
    #[error("point {s} (t = {t}) lies in the S-spectrum")]
    Spectral { t: f64, s: Quaternion },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid operator specification: {0}")]
    InvalidOperator(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
