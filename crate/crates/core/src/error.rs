use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("malformed rational `{0}`")]
    Rational(String),
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("invalid value: {0}")]
    Invalid(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("not a total x-derivative: {0}")]
    NotATotalDerivative(String),
    #[error("operands carry different truncations or coefficient products")]
    TruncationMismatch,
    #[error("operator is not of the form ∂x² + lower order terms")]
    NotMonicOrderTwo,
    #[error("Lax commutator has a nonzero coefficient at order {order}")]
    CommutatorNotOrderZero { order: i32 },
    #[error("negative ε-exponent leaked into an exported object: {0}")]
    NegativeEpsLeak(String),
    #[error("mode tuple of length {expected} does not match a monomial with {found} factors")]
    ArityMismatch { expected: usize, found: usize },
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("missing table entry: {0}")]
    MissingEntry(String),
    #[error("polynomial fit failed validation at a = {at}: expected {expected}, table has {found}")]
    FitValidationFailed {
        at: i64,
        expected: String,
        found: String,
    },
    #[error("inconsistent linear system at level {level}: {equations:?}")]
    InconsistentSystem { level: u32, equations: Vec<String> },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
