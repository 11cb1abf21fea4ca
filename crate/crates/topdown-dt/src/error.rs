//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable count {0} out of range (this crate supports at most 26)")]
    TooManyVariables(usize),

    #[error("coordinate {coord} out of range for a function on {n} variables")]
    CoordOutOfRange { coord: usize, n: usize },

    #[error("coordinate {0} assigned twice in a restriction")]
    DuplicateCoord(usize),

    #[error("arity mismatch: {0} vs {1} variables")]
    ArityMismatch(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("oracle limited to 16 variables, got {0}")]
    OracleTooLarge(usize),

    #[error("parse error at {at}: {msg}")]
    Parse { at: String, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
