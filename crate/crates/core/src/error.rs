use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vectors must have at least one coordinate")]
    EmptyVector,

    #[error("coordinate {index} is not finite")]
    NonFiniteCoordinate { index: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("weight {index} is {value}, expected a value in (0, 1]")]
    WeightRange { index: usize, value: f64 },

    #[error("weights sum to {sum}, expected 1 within 1e-12")]
    WeightSum { sum: f64 },

    #[error("{kind} needs at least {min} children, got {found}")]
    TooFewChildren {
        kind: &'static str,
        min: usize,
        found: usize,
    },

    #[error("matrix is not monotone: symmetric part is not positive semidefinite")]
    NotMonotone,

    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    SolveFailed { residual: f64, tolerance: f64 },

    #[error("iterate became non-finite at iteration {iteration}")]
    NonFiniteIterate { iteration: usize, last_finite: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
