use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("overflow evaluating at {at}")]
    Overflow { at: Complex64 },

    #[error("0/0 at {at}: reduce the map before evaluating")]
    Indeterminate { at: Complex64 },

    #[error("{at} is a pole of the map")]
    Pole { at: Complex64 },

    #[error("root finding failed for degree {degree} ({reason}); reconstruction residual {residual:e}")]
    RootFinding {
        degree: usize,
        residual: f64,
        reason: String,
    },

    #[error("{0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 2 for usage and parse problems, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Parse { .. } => 2,
            _ => 3,
        }
    }
}
