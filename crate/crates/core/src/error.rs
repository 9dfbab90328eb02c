use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("overlapping primitives {first} and {second} (intersection measure {measure})")]
    Overlap { first: usize, second: usize, measure: String },

    #[error("set is not representable in this model: {0}")]
    FamilyMismatch(String),

    #[error("unknown atom {0}")]
    UnknownAtom(String),

    /// A documented precondition does not hold; carries the reason (and citation where one exists).
    #[error("precondition refused: {0}")]
    Refused(String),

    #[error(
        "no level up to {n_max} reaches error below {eps_sq} (best error {best_error} at level {best_level})"
    )]
    NotFound { n_max: u32, eps_sq: String, best_error: String, best_level: u32 },

    #[error("cost guard: {0}")]
    TooLarge(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

impl Error {
    /// True for refusals of a well-formed request (as opposed to malformed input).
    pub fn is_refusal(&self) -> bool {
        matches!(self, Error::Refused(_) | Error::NotFound { .. } | Error::TooLarge(_))
    }
}
