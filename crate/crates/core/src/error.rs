use thiserror::Error;

/// Errors raised by the simulation modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("the Kerr strength U must be nonzero for this quantity")]
    ZeroKerr,

    #[error("runaway trajectory: |alpha| = {magnitude:.3e} exceeded the guard at t = {time:.4}")]
    Divergence { time: f64, magnitude: f64 },

    #[error("no steady state found by the multi-start search")]
    NoSteadyState,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("norm underflow in trajectory at t = {0:.4}")]
    NormUnderflow(f64),

    #[error("linear solve failed: {0}; use the time-propagation steady-state path instead")]
    SingularSystem(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("degenerate histogram: {0}")]
    DegenerateHistogram(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
