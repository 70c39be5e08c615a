use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis index {index} outside 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("time {0} outside the observation window (must be positive and finite)")]
    InvalidTime(f64),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("observation path has {got} values, expected n*p+1 = {expected}")]
    PathLength { got: usize, expected: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("noise configuration: {0}")]
    NoiseConfig(String),

    #[error("invalid inter-arrival density: {0}")]
    InvalidDensity(String),

    #[error("weight family is empty")]
    EmptyFamily,

    #[error("signal has zero discrete norm")]
    ZeroNorm,

    #[error("observation frequency p = {p} violates p >= n^(5/6) = {bound:.3} for n = {n}")]
    FrequencyCondition { n: usize, p: usize, bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
