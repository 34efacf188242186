use thiserror::Error;

/// Errors raised by parameter validation, kernel evaluation and the integrators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A Green function or potential was evaluated at `x == y`.
    #[error("kernel evaluated on its diagonal singularity")]
    DiagonalSingularity,

    /// Refinement stopped before the requested tolerance was reached.
    #[error("quadrature tolerance not met (estimate {estimate:e}, error {error:e})")]
    ToleranceNotMet { estimate: f64, error: f64 },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
