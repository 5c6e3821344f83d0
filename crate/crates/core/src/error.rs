use thiserror::Error;

/// Errors raised anywhere in the solver stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty region")]
    EmptyRegion,
    #[error("unbounded region")]
    UnboundedRegion,
    #[error("unbounded relaxation")]
    UnboundedRelaxation,
    #[error("degenerate working set")]
    DegenerateWorkingSet,
    #[error("relaxation did not converge within {0} iterations")]
    IterationLimit(usize),
    #[error("certification budget exceeded")]
    BudgetExceeded,
    #[error("coverage gap")]
    CoverageGap,
    #[error("H not symmetric")]
    HNotSymmetric,
    #[error("H not positive definite")]
    HNotPositiveDefinite,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("parse error at {pointer}: {msg}")]
    Parse { pointer: String, msg: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
