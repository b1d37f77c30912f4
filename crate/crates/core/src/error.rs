use thiserror::Error;

/// Errors raised by the discretization and solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("unsupported truncation order N = {0}: only odd orders are supported")]
    UnsupportedOrder(usize),

    #[error("model error: {0}")]
    Model(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular operator: {0}")]
    Singular(String),

    #[error("numerical breakdown: {0}")]
    Breakdown(String),

    #[error("no convergence after {iterations} iterations (relative residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
