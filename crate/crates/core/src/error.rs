use thiserror::Error;

use crate::statevector::StateVector;

/// Errors produced by the emulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: usize, limit: usize },

    #[error("no convergence after {iterations} iterations (last change {last_change:e})")]
    ConvergenceFailure {
        iterations: usize,
        last_change: f64,
        last: Box<StateVector>,
    },

    #[error("function is identically zero on the grid")]
    DegenerateFunction,

    #[error("zero-norm state cannot be normalized")]
    ZeroNorm,

    #[error("C_P is undefined for vanishing potential energy")]
    UndefinedConstant,

    #[error("no scaling window found in n = {lo}..={hi}")]
    DetectionFailure { lo: u32, hi: u32 },

    #[error("config error at line {line}, column {column}: {message}")]
    Config {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
