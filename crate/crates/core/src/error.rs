use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid probability mass function: {0}")]
    InvalidPmf(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("channel is not modulo-additive (max slice deviation {deviation:e})")]
    NotAdditive { deviation: f64 },
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("channel has zero capacity")]
    ZeroCapacity,
    #[error("modulus {0} is not prime")]
    NonPrime(u64),
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
    #[error("generator matrix is not full rank (rank {rank} < {k})")]
    RankDeficient { rank: usize, k: usize },
    #[error("virtual noise depends on the inputs (max deviation {deviation:e})")]
    IndependenceViolation { deviation: f64 },
    #[error("enumeration too large: {0}")]
    TooLarge(String),
    #[error("invalid transform spec: {0}")]
    InvalidSpec(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
