use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("combinatorial budget exceeded: {what} needs more than {cap}")]
    BudgetExceeded { what: String, cap: u64 },

    /// An iterative routine hit its cap; the bracket `[lower, upper]` is still valid.
    #[error("no convergence after {iterations} iterations (bracket [{lower}, {upper}])")]
    NonConvergence {
        iterations: usize,
        lower: f64,
        upper: f64,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("insufficient points: {found} left, need at least {needed}")]
    InsufficientPoints { found: usize, needed: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for outcomes that are a property of the instance rather than bad input.
    pub fn is_infeasible_kind(&self) -> bool {
        matches!(
            self,
            Error::BudgetExceeded { .. }
                | Error::NonConvergence { .. }
                | Error::Infeasible(_)
                | Error::InsufficientPoints { .. }
                | Error::Verification(_)
        )
    }
}
