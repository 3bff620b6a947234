use thiserror::Error;

/// Errors raised by the library. Every variant corresponds to a violated
/// precondition of some operation; none of them indicate a bug.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The value is not a p-adic integer (its reduced denominator is divisible by p).
    #[error("{value} is not a {p}-adic integer: its denominator is divisible by {p}")]
    NotPadicInteger { value: String, p: u64 },

    #[error("{0} is not a unit modulo {1}")]
    NotAUnit(String, String),

    #[error("step budget of {0} exhausted")]
    BudgetExhausted(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cannot parse {0:?}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
