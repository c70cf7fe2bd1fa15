use num_bigint::BigUint;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A cofactor resisted splitting within the work allowance.
    #[error("factorization budget exhausted after {work} probe steps on cofactor {cofactor}")]
    BudgetExhausted { cofactor: BigUint, work: u64 },

    #[error("value has {digits} decimal digits, above the limit of {limit}")]
    DigitLimit { digits: usize, limit: usize },

    #[error("invalid factorization: {0}")]
    InvalidFactorization(String),

    #[error("{0} is not multiperfect")]
    NotMultiperfect(BigUint),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("squarefree factorization needs at least two primes, got {0}")]
    TooFewFactors(usize),

    #[error("corrupt cache entry on line {line}: {reason}")]
    CorruptEntry { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Budget and digit-limit failures are resource limits, not mathematical outcomes.
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::BudgetExhausted { .. } | Error::DigitLimit { .. })
    }
}
