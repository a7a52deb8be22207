use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent configuration (file syntax, unknown keys,
    /// missing required values, invalid parameter combinations).
    #[error("configuration error: {0}")]
    Config(String),

    /// Inputs outside the mathematical domain of an operation
    /// (|rbar| > 1, negative risk weight, argument below the Lambert branch
    /// point, mismatched array lengths, and similar).
    #[error("domain error: {0}")]
    Domain(String),

    /// A request that is well formed but outside the implemented scope,
    /// reported instead of silently returning something wrong.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// The backward Riccati integration lost the positivity its feedback
    /// formulas require.
    #[error("solver failure at s = {s}: {msg}")]
    Solver { s: f64, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub fn solver(s: f64, msg: impl Into<String>) -> Self {
        Error::Solver { s, msg: msg.into() }
    }
}
