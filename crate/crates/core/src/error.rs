use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero has no prime decomposition")]
    ZeroHasNoFactorization,

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("exponent overflow at prime {prime}")]
    ExponentOverflow { prime: u64 },

    #[error("{0} requires a nonempty input")]
    EmptyInput(&'static str),

    #[error("invalid {law} parameter: {constraint}")]
    InvalidParameter { law: &'static str, constraint: String },

    #[error("no closed form for {0}")]
    NoClosedForm(String),

    #[error("series for {what} did not reach tolerance {tol:e} (tail bound {bound:e})")]
    Truncation { what: String, bound: f64, tol: f64 },

    #[error("infinite moment: {0}")]
    InfiniteMoment(String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("sample of size {len} is below the minimum of {min}")]
    SampleTooSmall { len: usize, min: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
