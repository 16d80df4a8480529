use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid anyon model: {0}")]
    InvalidModel(String),
    #[error("SU(2)_k level must be at least 1")]
    ZeroLevel,
    #[error("generator index {index} out of range 1..={max}")]
    GeneratorOutOfRange { index: usize, max: usize },
    #[error("strand count {0} must be even and at least 2")]
    OddStrandCount(usize),
    #[error("pairing is not a non-crossing perfect matching")]
    InvalidPairing,
    #[error("state length {got} does not match basis dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(
        "memory budget exceeded: {required} bytes required, budget {budget} bytes ({formula})"
    )]
    MemoryBudget {
        required: u128,
        budget: u64,
        formula: String,
    },
    #[error("invalid walk configuration: {0}")]
    InvalidConfig(String),
    #[error("path-sum horizon {t} exceeds cap {cap}")]
    PathCapExceeded { t: usize, cap: usize },
    #[error("{crossings} crossings exceed the bracket cap of {cap}")]
    CrossingCapExceeded { crossings: usize, cap: usize },
    #[error("{strands} strands exceed the trace-identity cap of {cap}")]
    StrandCapExceeded { strands: usize, cap: usize },
    #[error("distribution is not normalized (total {0})")]
    Unnormalized(f64),
    #[error("support domains differ")]
    DomainMismatch,
    #[error("series is degenerate: {0}")]
    DegenerateSeries(String),
    #[error("trajectory was not produced with absorbing boundaries")]
    NotAbsorbing,
    #[error("projected two-qubit norm vanishes")]
    ZeroProjection,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
