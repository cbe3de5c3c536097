use crate::rational::Rational;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("measure has no atoms")]
    EmptyMeasure,

    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("negative weight {0}")]
    NegativeWeight(Rational),

    #[error("all weights are zero")]
    ZeroTotalWeight,

    #[error("weights sum to {0}, expected exactly 1")]
    WeightSum(Rational),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("{field}: {message}")]
    Parse { field: String, message: String },

    #[error("invalid Farkas certificate: {0}")]
    InvalidCertificate(String),

    #[error("probe direction {0} is orthogonal to a support difference")]
    CriticalProbe(String),

    #[error("zero direction is not allowed here")]
    ZeroDirection,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}
