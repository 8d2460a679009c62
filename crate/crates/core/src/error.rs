use thiserror::Error;

/// Failure modes shared by every computation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("no convergence after {iterations} iterations (best residual {best_residual:.3e})")]
    Convergence { iterations: usize, best_residual: f64 },

    #[error("accuracy target missed: {0}")]
    Accuracy(String),

    #[error("no resonance: {0}")]
    NoResonance(String),

    #[error("grid resolution: {0}")]
    GridResolution(String),

    #[error("bracket: {0}")]
    Bracket(String),

    #[error("singular factorization (zero pivot at row {0})")]
    Singular(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
