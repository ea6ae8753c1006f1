use thiserror::Error;

/// Errors produced by constructors and checkers across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} is out of the supported range (1..=2^32)")]
    BadModulus(u64),

    #[error("{divisor} does not divide {modulus}")]
    NotADivisor { divisor: u64, modulus: u64 },

    #[error("element {element} appears more than once")]
    DuplicateElement { element: u64 },

    #[error("multiset is not a set (weight {weight} at {element})")]
    NotASet { element: u64, weight: i64 },

    #[error("operands live in different groups ({0} vs {1})")]
    ModulusMismatch(u64, u64),

    #[error("{0} is not invertible modulo {1}")]
    NotAUnit(u64, u64),

    #[error("moduli with more than {max} distinct primes are unsupported here (got {got})")]
    TooManyPrimes { max: usize, got: usize },

    #[error("unsupported modulus: {0}")]
    UnsupportedModulus(String),

    #[error("not a tiling: {0}")]
    NotATiling(String),

    #[error("invalid isometry: {0}")]
    InvalidIsometry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("search budget of {budget} nodes exhausted")]
    BudgetExhausted { budget: u64 },

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
