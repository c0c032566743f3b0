use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value left the representable exponent range.
    #[error("exponent range exceeded in {0}")]
    Range(&'static str),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Working precision is insufficient for the requested computation.
    #[error("precision exhausted: {0}")]
    Precision(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A point was outside the region where a local coordinate is available.
    #[error("outside domain: {0}")]
    OutsideDomain(String),

    /// The computed object failed a structural identity it must satisfy.
    #[error("structural check failed: {0}")]
    Structural(String),

    /// Iteration budget exhausted before a verdict could be reached.
    #[error("undecided after {budget} iterations")]
    Undecided { budget: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
