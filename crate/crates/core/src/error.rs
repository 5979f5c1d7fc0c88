use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("subsystem index {index} out of range for {count} subsystems")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("operator has negative eigenvalue {0:.3e}")]
    NegativeEigenvalue(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),

    #[error("scenario mismatch: expected {expected}, found {found}")]
    ScenarioMismatch { expected: String, found: String },

    #[error("size guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("invalid network layout: {0}")]
    InvalidLayout(String),

    #[error("linear program infeasible: {0}")]
    Infeasible(String),

    #[error("linear program did not converge after {0} pivots")]
    NonConvergence(usize),

    #[error("numerical breakdown: {0}")]
    Numerical(String),

    #[error("certificate failed re-verification: {0}")]
    Certificate(String),

    #[error("no sign change in bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Json(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
