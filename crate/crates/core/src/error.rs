use thiserror::Error;

/// Errors produced by the model, solvers and analyses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("age must be non-negative, got {0}")]
    NegativeAge(f64),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),

    #[error("length mismatch: expected {expected} samples, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("time step {dt} violates the stability bound; largest stable step is {suggested}")]
    StepTooLarge { dt: f64, suggested: f64 },

    #[error("positivity lost at time step {step}, age node {node} (value {value:e}); try dt <= {suggested}")]
    PositivityLost {
        step: usize,
        node: usize,
        value: f64,
        suggested: f64,
    },

    #[error("tolerance {tol:e} not met after refinement; best estimate {estimate} (error estimate {error:e})")]
    ToleranceNotMet { tol: f64, estimate: f64, error: f64 },

    #[error("non-finite fixed-point map value at B = {0}")]
    NonFinite(f64),

    #[error("root bracketing failed: {0}")]
    Bracket(String),

    #[error("degenerate parameters: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
