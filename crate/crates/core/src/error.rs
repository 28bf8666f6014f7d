use thiserror::Error;

/// Errors raised by detection, decomposition and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectError {
    #[error("bit vector has length {got}, expected {expected}")]
    BitLength { expected: usize, got: usize },
    #[error("prior LLR vector has length {got}, expected {expected}")]
    PriorLength { expected: usize, got: usize },
    #[error("bit values must be -1 or +1, got {0}")]
    InvalidBit(i8),
    #[error("symbol {0} is not a point of the constellation")]
    NotAConstellationPoint(num_complex::Complex64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("channel matrix is singular (diagonal entry {value:e} below threshold {threshold:e})")]
    SingularChannel { value: f64, threshold: f64 },
    #[error("degenerate projection for layer {layer} (norm {value:e} below threshold {threshold:e})")]
    DegenerateProjection { layer: usize, value: f64, threshold: f64 },
    #[error("layer index {index} out of range for {layers} layers")]
    LayerIndex { index: usize, layers: usize },
    #[error("unsupported layer count {0}, expected 2..=4")]
    LayerCount(usize),
    #[error("candidate list is empty")]
    EmptyList,
    #[error("bit {bit} of layer {layer} has an empty partition in every list")]
    EmptyPartition { layer: usize, bit: usize },
    #[error("expected {expected} candidate lists, got {got}")]
    ListCount { expected: usize, got: usize },
    #[error("candidate lists disagree: {0}")]
    InconsistentLists(String),
    #[error("enumeration of {hypotheses} hypotheses exceeds the budget of {budget}")]
    BudgetExceeded { hypotheses: u128, budget: u128 },
    #[error("unsupported PAM size {0}")]
    UnsupportedPam(usize),
    #[error("invalid shift-add target {0}")]
    InvalidTarget(u64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("shadow oracle mismatch at snr index {snr_idx}, trial {trial}: {detail}")]
    OracleMismatch {
        snr_idx: usize,
        trial: usize,
        detail: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for DetectError {
    fn from(e: std::io::Error) -> Self {
        DetectError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, DetectError>;
