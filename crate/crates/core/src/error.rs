use thiserror::Error;

/// Errors raised by the exact operator toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("expected a real scalar, found {0}")]
    NotReal(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("matrix is not hermitian: {0}")]
    NotHermitian(String),

    #[error("diagonal entry at {0} is not real")]
    NonRealDiagonal(String),

    #[error("wrong kind: expected {expected}, found {found}")]
    WrongKind { expected: String, found: String },

    #[error("search did not converge within budget {budget} at precision level {level}")]
    NotConverged { level: u32, budget: u32 },

    #[error("operator is not a rank-one projection")]
    NotProjection,

    #[error("state is not normalized: squared norm {norm_sq} differs from its divisor {divisor}")]
    NotNormalized { norm_sq: String, divisor: String },

    #[error("operator is not positive semidefinite: {0}")]
    NotPositive(String),

    #[error("eigensolver did not converge")]
    EigenNoConvergence,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
