use thiserror::Error;

/// Errors raised by the weak-covering library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The request cannot be satisfied (too many distinct vertices, NA cells, ...).
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unsupported dimension {dim}: the direction-number table covers d <= {max}")]
    UnsupportedDimension { dim: usize, max: usize },

    /// A numerical routine failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
