use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid form: {0}")]
    InvalidForm(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("not a unit")]
    NotAUnit,
    #[error("plane fails (2-) condition: {0}")]
    PlaneNotNegative(String),
    #[error("dependent plane vectors")]
    DependentPlane,
    #[error("polarization failure: neither sign of alpha gives a positive definite form")]
    PolarizationFailure,
    #[error("value too large: {0}")]
    TooLarge(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
