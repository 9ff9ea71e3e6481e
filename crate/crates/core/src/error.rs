use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("weight matrix is not coherent: tie at subset {0}")]
    NotCoherent(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-integral input: {0}")]
    NonIntegral(String),
    #[error("polytope has dimension {got}, expected {expected}")]
    LowerDimensional { expected: usize, got: usize },
    #[error("point is not a vertex: {0}")]
    NotAVertex(String),
    #[error("integer overflow in exact kernel")]
    Overflow,
    #[error("outside desk-scale limits: {0}")]
    ScaleLimit(String),
    #[error("not a binomial: {0} terms")]
    NotBinomial(usize),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("step {step} failed verification: {reason}")]
    StepVerification { step: usize, reason: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameters(msg.into())
    }
}
