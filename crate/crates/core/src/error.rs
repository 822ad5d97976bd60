//! Error type shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("ill-conditioned curve: {0}")]
    IllConditionedCurve(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The integration path runs too close to a branch point; perturb the point.
    #[error("integration path within {distance:e} of branch point {branch_point}")]
    PathDegenerate { branch_point: f64, distance: f64 },

    #[error("expected exactly one theta characteristic candidate, found {survivors}")]
    AmbiguousConstant { survivors: usize },

    #[error("point is not on the theta divisor (relative residual {residual:e})")]
    NotOnTheta { residual: f64 },

    #[error("rank is indeterminate: singular value ratio {ratio:e} lies in the borderline band [{tol:e}, {upper:e}]")]
    IndeterminateRank { ratio: f64, tol: f64, upper: f64 },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
}

impl Error {
    /// Stable machine-readable code, used in CLI reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "INVALID_INPUT",
            Error::IllConditionedCurve(_) => "ILL_CONDITIONED_CURVE",
            Error::NumericalFailure(_) => "NUMERICAL_FAILURE",
            Error::PathDegenerate { .. } => "PATH_DEGENERATE",
            Error::AmbiguousConstant { .. } => "AMBIGUOUS_CONSTANT",
            Error::NotOnTheta { .. } => "NOT_ON_THETA",
            Error::IndeterminateRank { .. } => "INDETERMINATE_RANK",
            Error::PreconditionFailed(_) => "PRECONDITION_FAILED",
        }
    }

    /// True when the failure is attributable to the caller's input rather
    /// than to the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::IllConditionedCurve(_)
                | Error::NotOnTheta { .. }
                | Error::PreconditionFailed(_)
        )
    }
}
