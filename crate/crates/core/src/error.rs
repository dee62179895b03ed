use thiserror::Error;

/// Errors raised by construction and validation across the crate.
#[derive(Debug, Error)]
pub enum QcdmaError {
    #[error("incompatible discretizations: operands live on different frequency grids")]
    GridMismatch,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("grid too coarse: {n_samples} samples cannot resolve {n_chips} chips (need >= 16 per chip)")]
    Resolution { n_samples: usize, n_chips: usize },

    #[error("degenerate superposition: pre-normalization norm {0:.3e}")]
    DegenerateSuperposition(f64),

    #[error("matrix is not unitary: max |B^H B - I| = {residual:.3e}")]
    NotUnitary { residual: f64 },

    #[error("{0} must be a power of two, got {1}")]
    NotPowerOfTwo(&'static str, usize),

    #[error("index {index} out of range 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("transmitter {index} is not a {expected} state; this engine handles only {expected} inputs")]
    WrongEngine { index: usize, expected: &'static str },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, QcdmaError>;
