use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is numerically singular (pivot {pivot:e} at step {step}, scale {scale:e})")]
    SingularMatrix { step: usize, pivot: f64, scale: f64 },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: &'static str, actual: alloc::string::String },

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("index ({row}, {col}) out of range for size {size}")]
    IndexOutOfRange { row: usize, col: usize, size: usize },

    #[error("invalid position map: {0}")]
    InvalidPositionMap(&'static str),

    #[error("matrix of size {size} exceeds the densify cap {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(alloc::string::String),

    #[error("interior load on ring {ring} is nonzero; boundary-only sweeps require an unloaded interior")]
    InteriorLoad { ring: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("operation requires a full-mode sweep")]
    ModeMismatch,

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

impl Error {
    pub(crate) fn shape(expected: &'static str, actual: impl core::fmt::Display) -> Self {
        Error::ShapeMismatch { expected, actual: alloc::format!("{actual}") }
    }
}
