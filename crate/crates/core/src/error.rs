use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("gcd({0}, {1}) != 1")]
    NotCoprime(i64, i64),

    #[error("weight {0} is not negative; use the non-negative weight engine")]
    WeightNotNegative(String),

    #[error("weight {0} is negative; use the negative weight engine")]
    WeightNegative(String),

    #[error("the polar part is empty: the function is finite at the cusps")]
    NoPolarPart,

    #[error("target error {target:e} unreachable: {reason}")]
    TargetUnreachable { target: f64, reason: String },

    #[error("cut {cut} lies beyond the truncation order {order}")]
    CutBeyondTruncation { cut: String, order: usize },

    #[error("pole of {function} at {at}")]
    Pole { function: &'static str, at: String },

    #[error("no convergence after {0} iterations")]
    IterationLimit(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
