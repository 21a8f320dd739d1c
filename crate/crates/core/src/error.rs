use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Operand dimensions do not conform.
    #[error("shape error: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    /// A floating-point computation produced a non-finite value or a
    /// singular system.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An iterative solver hit its iteration cap; carries the last iterate.
    #[error("no convergence after {iterations} iterations")]
    NotConverged {
        iterations: usize,
        last: Box<crate::capacity::AllocationPlan>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn shape(expected: impl Into<String>, got: impl Into<String>) -> Self {
        Error::Shape {
            expected: expected.into(),
            got: got.into(),
        }
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
