use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GkError {
    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("enumeration budget exceeded: n = {n} > {limit} (transpose the instance if m < n)")]
    Budget { n: usize, limit: usize },

    #[error("requested order {requested} exceeds the {available} coefficients available")]
    InsufficientOrder { requested: usize, available: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, GkError>;
