use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is rank deficient (smallest singular value {smallest:e}, largest {largest:e})")]
    RankDeficient { smallest: f64, largest: f64 },

    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("columns are not orthonormal (defect {defect:e})")]
    NotOrthonormal { defect: f64 },

    #[error("objective returned a non-finite value at {at:?}")]
    NonFiniteValue { at: Vec<f64> },

    #[error("point outside the objective's domain: {0}")]
    DomainViolation(String),

    #[error("sublevel set not reached within radius {radius}")]
    SliceEmpty { radius: f64 },

    #[error("gradient vanishes at {at:?}")]
    ZeroGradient { at: Vec<f64> },

    #[error("points coincide")]
    CoincidentPoints,

    #[error("coefficients must be nonzero, strictly descending and contain a negative entry")]
    BadSignature,

    #[error("invalid level {0}")]
    InvalidLevel(f64),

    #[error("subspace does not meet the trust region")]
    SubspaceMissesRegion,

    #[error("invalid bracket [{lower}, {upper}]")]
    InvalidBracket { lower: f64, upper: f64 },

    #[error("new level {next} is below the previous level {previous}")]
    LowerBoundViolated { previous: f64, next: f64 },

    #[error("objective is unbounded below on the complementary space (reached {value} at the region boundary)")]
    Unbounded { value: f64 },

    #[error("simplex is degenerate")]
    SingularSimplex,

    #[error("fitted curvature is not negative definite (largest eigenvalue {largest:e})")]
    NotConcave { largest: f64 },

    #[error("invalid configuration for `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("need at least {needed} records, trace has {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("trace format: {0}")]
    TraceFormat(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
