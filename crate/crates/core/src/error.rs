use thiserror::Error;

/// Errors produced anywhere in the core crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spin index {index} out of range for a model with {num_spins} spins")]
    SpinOutOfRange { index: usize, num_spins: usize },
    #[error("self-coupling on spin {0}")]
    SelfCoupling(usize),
    #[error("coupling ({0}, {1}) is zero; absent couplers must be omitted")]
    ZeroCoupling(usize, usize),
    #[error("coupling ({0}, {1}) given more than once")]
    DuplicateCoupling(usize, usize),
    #[error("non-finite value {value} for {what}")]
    NonFinite { what: &'static str, value: f64 },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("chain pairs overlap at spin {0}")]
    OverlappingChains(usize),
    #[error("chain pair ({0}, {1}) is not coupled")]
    UncoupledChain(usize, usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("search budget of {0} nodes exceeded")]
    BudgetExceeded(u64),
    #[error("permutation is not an automorphism: {0}")]
    NotAutomorphism(String),
    #[error("invalid orbit specification: {0}")]
    InvalidOrbits(String),
    #[error("inconsistent embeddings: {0}")]
    InconsistentEmbedding(String),
    #[error("model has {0} spins; exact enumeration is limited to {1}")]
    TooLarge(usize, usize),
    #[error("coloring is not proper: {0}")]
    BadColoring(String),
    #[error("history holds {have} entries, {need} required")]
    InsufficientHistory { have: usize, need: usize },
    #[error("coupler orbit {0} has zero mean coupling and cannot be renormalized")]
    ZeroOrbitMean(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
