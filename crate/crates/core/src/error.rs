use thiserror::Error;

/// Every failure the engine can report.
///
/// The CLI maps these onto exit codes: input problems, cap hits and invariant
/// violations are kept apart so scripts can tell them from one another.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not an odd prime below 65536")]
    InvalidPrime(u64),
    #[error("extension degree {needed} exceeds the configured cap {cap}")]
    ExtensionDegreeExceeded { needed: usize, cap: usize },
    #[error("wild ramification: {n} is divisible by the characteristic {p}")]
    WildRamification { n: u64, p: u32 },
    #[error("characteristic {p} does not exceed the degree {degree}")]
    WildCharacteristic { p: u32, degree: usize },
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("polynomial is not squarefree: {0}")]
    NotSquarefree(String),
    #[error("leading x-coefficient is not a unit in F_p[[t]]")]
    NonUnitLeadingCoefficient,
    #[error("series is not a unit")]
    NotAUnit,
    #[error("functional inverse needs valuation exactly 1, got {0}")]
    NotInvertible(String),
    #[error("substitution needs an argument of positive valuation, got {0}")]
    DivergentSubstitution(String),
    #[error("recursion depth exceeds the cap of {0}")]
    RecursionDepthExceeded(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    /// True for errors caused by a configured resource bound rather than the input.
    pub fn is_cap(&self) -> bool {
        matches!(
            self,
            Error::PrecisionExhausted(_)
                | Error::ExtensionDegreeExceeded { .. }
                | Error::RecursionDepthExceeded(_)
        )
    }

    pub fn is_invariant(&self) -> bool {
        matches!(self, Error::InvariantViolation(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precision(msg: impl Into<String>) -> Error {
    Error::PrecisionExhausted(msg.into())
}

pub(crate) fn invariant(msg: impl Into<String>) -> Error {
    Error::InvariantViolation(msg.into())
}
