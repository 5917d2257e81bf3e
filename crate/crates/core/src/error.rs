use thiserror::Error;

/// Coarse failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    InvalidInput,
    Budget,
    Unsupported,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("mixed quadratic contexts: sqrt({0}) and sqrt({1})")]
    MixedDiscriminants(u64, u64),

    #[error("triangle inequality fails for ({x}, {y}, {z}): d({x},{z}) > d({x},{y}) + d({y},{z})")]
    TriangleViolation { x: String, y: String, z: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("quotient order exceeds budget of {limit}")]
    OrderBudget { limit: usize },

    #[error("separation budget exhausted after trying degrees up to {last_degree}")]
    SeparationBudget { last_degree: usize },

    #[error("unsupported instance: {0}")]
    Unsupported(String),

    #[error("rank deficiency: {0}")]
    Rank(String),

    #[error("insufficient ambient dimension: need {needed}, have {available}")]
    Capacity { needed: usize, available: usize },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Malformed(_)
            | Error::MixedDiscriminants(..)
            | Error::TriangleViolation { .. }
            | Error::Precondition(_)
            | Error::Rank(_)
            | Error::Capacity { .. } => ErrorClass::InvalidInput,
            Error::OrderBudget { .. } | Error::SeparationBudget { .. } => ErrorClass::Budget,
            Error::Unsupported(_) => ErrorClass::Unsupported,
            Error::Internal(_) => ErrorClass::Internal,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
