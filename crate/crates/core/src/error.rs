use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A diagonal pivot is too small to eliminate.
    #[error("singular pivot at index {index} (|pivot| = {pivot:e})")]
    SingularPivot { index: usize, pivot: f64 },

    /// The constraint block `A1|_T` is not positive definite.
    #[error("support {support:?} is infeasible: constraint block is not positive definite")]
    InfeasibleSupport { support: Vec<usize> },

    /// `X|_T` is singular, so `p|_T` cannot be evaluated through a Schur complement.
    #[error("cannot condition on {support:?}: principal block is singular")]
    SingularConditioning { support: Vec<usize> },

    /// Every remaining candidate was excluded before the support reached size k.
    #[error("no admissible candidate remains; partial support {partial:?}")]
    ExhaustedSupport { partial: Vec<usize> },

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("approximation bound undefined: {0}")]
    UndefinedBound(String),

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
