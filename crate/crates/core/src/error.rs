//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty series")]
    EmptySeries,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("too few samples: {0}")]
    InsufficientSamples(String),

    #[error("horizon too short to establish a trend: {0}")]
    InsufficientHorizon(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("iteration diverged: {0}")]
    DivergedIterate(String),

    #[error("quadratic phase unresolved on this grid: {0}")]
    UnresolvedPhase(String),
}
