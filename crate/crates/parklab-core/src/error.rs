use thiserror::Error;

/// Errors produced by the parking model library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model parameters m={m}, n={n}, p={p}: need 1 <= m <= n and 0 <= p <= 1")]
    InvalidModel { m: u32, n: u32, p: f64 },

    #[error("invalid preference list: {0}")]
    InvalidPreferences(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
