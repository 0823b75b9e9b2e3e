use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported polynomial degree {0} (expected 1..=4)")]
    UnsupportedDegree(usize),

    #[error("mesh needs at least 2 elements, got {0}")]
    TooFewElements(usize),

    #[error("eigenvalue index {index} out of range 1..={max}")]
    InvalidIndex { index: usize, max: usize },

    #[error("mass matrix is not positive definite ({context}): pivot {pivot} at row {row}")]
    NotPositiveDefinite {
        context: String,
        row: usize,
        pivot: f64,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("indefinite system: smallest eigenvalue {0} is not positive")]
    IndefiniteSystem(f64),

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("inconsistent configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
