use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the samplers, the solver and the statistics helpers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("chi degree must be at least 1")]
    ZeroDegree,

    #[error("matrix order must be at least 1")]
    ZeroOrder,

    #[error("2x2 input is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("invalid sample spec: {0}")]
    InvalidSpec(String),

    #[error("order {n} exceeds the dense materialization cap {cap}")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("QR iteration budget exhausted after {chases} chases ({} of {n} eigenvalues found)", partial.len())]
    NoConvergence {
        n: usize,
        chases: usize,
        partial: Vec<Complex64>,
    },

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
