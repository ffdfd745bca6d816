use thiserror::Error;

/// Errors produced by mesh construction, quadrature, assembly and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate cell {cell}: volume {volume:e}")]
    DegenerateCell { cell: usize, volume: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e}")]
    QuadratureNonConvergence { estimate: f64, error: f64 },

    #[error("integrand is not integrable at the endpoint: {0}")]
    Divergent(String),

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("negative Rayleigh quotient {0:e}: the deficit form is not positive semi-definite")]
    NegativeRayleighQuotient(f64),

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("root bracketing failed: {0}")]
    BracketFailure(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
