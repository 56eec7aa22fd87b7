use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e}, tolerance {tolerance:.1e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix is not unitary (max deviation {deviation:.3e}, tolerance {tolerance:.1e})")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid Bell coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("expectation value {name} = {value} lies outside [-1, 1]")]
    ExpectationOutOfRange { name: &'static str, value: f64 },

    #[error("index {index} out of range {range}")]
    IndexOutOfRange { index: usize, range: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "norm drift {drift:.3e} at t = {time} exceeds {limit:.1e}; retry with a smaller time step"
    )]
    NormDrift { time: f64, drift: f64, limit: f64 },

    #[error("zero denominator in `{term}`")]
    ZeroDenominator { term: &'static str },

    #[error(
        "effective field has no sign change on [{lo}, {hi}]: B({lo}) = {field_lo:.6e}, B({hi}) = {field_hi:.6e}"
    )]
    NoSignChange {
        lo: f64,
        hi: f64,
        field_lo: f64,
        field_hi: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
