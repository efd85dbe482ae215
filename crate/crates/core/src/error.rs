use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A precondition on an input was violated.
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("malformed measure document: {0}")]
    Malformed(String),
    /// An iteration or quadrature did not reach its tolerance.
    #[error("no convergence: {0}")]
    NoConvergence(String),
    /// Truncated sums whose dropped tail is not small against the sampling error.
    #[error("truncation dominated: tail proxy {tail:.3e} exceeds 10 x se {se:.3e}")]
    TruncationDominated { tail: f64, se: f64 },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
