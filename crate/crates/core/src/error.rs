use thiserror::Error;

/// Errors raised by the library. Every variant carries enough context to
/// point at the offending input.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("prime {prime} divides the denominator of entry ({row}, {col})")]
    DenominatorDivisible { prime: u64, row: usize, col: usize },

    #[error("the zero vector is not a projective point")]
    ZeroPoint,

    #[error("points[{second}] duplicates points[{first}]")]
    DuplicatePoint { first: usize, second: usize },

    #[error("multiplicity at index {index} must be positive")]
    ZeroMultiplicity { index: usize },

    #[error("point lies on the flat, no hyperplane or extension can avoid it")]
    AvoidOnFlat,

    #[error("impossible geometry: {0}")]
    ImpossibleGeometry(String),

    #[error("randomized construction failed after {attempts} attempts: {what}")]
    RetriesExhausted { what: String, attempts: usize },

    #[error("regularity search exceeded its cap of {cap}")]
    RegularityCapExceeded { cap: usize },

    #[error("point coincides with points[{index}] of the scheme")]
    PointCoincides { index: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("certificate construction failed: {0}")]
    CertificateConstruction(String),

    #[error("degree overflow: product degree {degree} exceeds guard {guard}")]
    DegreeOverflow { degree: usize, guard: usize },

    #[error("pattern unsatisfiable: {0}")]
    PatternUnsatisfiable(String),

    #[error("invalid input at {path}: {message}")]
    Input { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
