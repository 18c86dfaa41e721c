use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("frame is not orthonormal: Gram matrix deviates from identity by {deviation:e}")]
    NonOrthonormalFrame { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("space mismatch: {left} vs {right}")]
    SpaceMismatch { left: String, right: String },

    #[error("labels are not a bijection with the group: {0}")]
    BadLabeling(String),

    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),

    #[error("bad factorization: {0}")]
    BadFactorization(String),

    #[error("operation not available for this flavor: {0}")]
    FlavorMismatch(String),

    #[error("point {point} is not on the {mesh} mesh")]
    OffMeshPoint { point: String, mesh: String },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("size budget exceeded: {required} basis vectors requested, budget is {budget}")]
    SizeBudgetExceeded { required: u128, budget: u128 },

    #[error("map is not multilinear in slot {slot} (defect {defect:e})")]
    NotMultilinear { slot: usize, defect: f64 },

    #[error("zero frequency at momentum {0}; field operators need a positive mass")]
    ZeroFrequency(String),

    #[error("syntax error at line {line}, column {column} near {token:?}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        token: String,
        message: String,
    },

    #[error("unknown generator {name:?} at line {line}, column {column}")]
    UnknownGenerator {
        name: String,
        line: usize,
        column: usize,
    },

    #[error("type mismatch: {expected} does not match {found}")]
    TypeMismatch { expected: String, found: String },

    #[error("unbound name {0:?}")]
    UnboundName(String),
}
