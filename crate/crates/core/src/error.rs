use alloc::string::String;

/// Errors raised by the library. Mathematical verdicts (including negative
/// ones) are never errors; these signal bad input or exhausted resources.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("valuation of zero is undefined")]
    ValuationOfZero,
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("level {level} exceeds precision {precision}")]
    LevelExceedsPrecision { level: usize, precision: usize },
    #[error("completion elements do not share a base and precision")]
    IncompatibleElements,
    #[error("search budget of {budget} steps exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("malformed element: {0}")]
    MalformedElement(String),
    #[error("sigma domain exhausts the primes of the second class below {prime_bound}")]
    SigmaExhausted { prime_bound: u64 },
    #[error("independence surrogate failed: {0}")]
    IndependenceFailed(String),
    #[error("precision {0} is too low")]
    PrecisionTooLow(usize),
    #[error("kernel is not free")]
    KernelNotFree,
    #[error("offsets are not given by a total rule")]
    OffsetsNotTotal,
    #[error("unsupported presentation: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl From<crate::lattice::BudgetExceeded> for Error {
    fn from(b: crate::lattice::BudgetExceeded) -> Self {
        Error::BudgetExceeded { budget: b.budget }
    }
}
