use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("amplitude vector has length {got}, expected d^n = {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid wires {wires:?} for a {wire_count}-wire register")]
    InvalidWires {
        wires: Vec<usize>,
        wire_count: usize,
    },

    #[error("unknown gate `{0}`")]
    UnknownGate(String),

    #[error("invalid dimension d = {0} (need d >= 2)")]
    InvalidDimension(usize),

    #[error("invalid label: {0}")]
    InvalidLabel(String),

    #[error("value {value} out of range [0, {bound})")]
    OutOfRange { value: usize, bound: usize },

    #[error("no outcome reached the {threshold} decision share on wires {wires:?} (best share {best_share})")]
    AmbiguousOutcome {
        wires: Vec<usize>,
        best_share: f64,
        threshold: f64,
    },

    #[error("system and ancilla do not factorize (largest Schmidt weight {schmidt_weight})")]
    NotFactorizable { schmidt_weight: f64 },

    #[error("operation requires qubits (d = 2), got d = {0}")]
    UnsupportedDimension(usize),

    #[error("shot count must be at least 1")]
    InvalidShots,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("register too large: {0}")]
    TooLarge(String),

    #[error("invalid error spec: {0}")]
    InvalidErrorSpec(String),
}
