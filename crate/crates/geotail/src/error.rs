//! Crate-wide error type.

/// Errors produced by constructors, solvers and oracles.
///
/// The CLI maps these onto exit codes: parameter/domain problems are
/// input errors (exit 1), failed cross-checks between independent
/// computation routes are validation failures (exit 2).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("probability mass mismatch: {0}")]
    MassMismatch(String),

    #[error("step law concentrated on a half-axis: {0}")]
    HalfAxis(String),

    #[error("step mean must be negative, got {mean}")]
    NonNegativeDrift { mean: f64 },

    #[error("expected a step law with a geometric {expected} tail")]
    WrongTailSide { expected: &'static str },

    #[error("argument {value} outside the valid region ({lo}, {hi})")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("no sign change in bracket [{lo}, {hi}] (f-1: {f_lo} .. {f_hi})")]
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("load violation: {0}")]
    LoadViolation(String),

    #[error("oracle disagreement: {0}")]
    OracleDisagreement(String),

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("certified truncation bound {bound:e} exceeds requested tolerance {tol:e}")]
    TruncationBound { bound: f64, tol: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether this error is a validation failure (a numeric cross-check
    /// between independent routes failed) rather than an input error.
    pub fn is_validation_failure(&self) -> bool {
        matches!(
            self,
            Error::OracleDisagreement(_) | Error::NonConvergence(_) | Error::TruncationBound { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
