use thiserror::Error;

/// Errors raised anywhere in the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: String,
    },
    #[error("table has no entry for input {0:?}")]
    TableMiss(Vec<f64>),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid hypothesis: {0}")]
    InvalidHypothesis(String),
    #[error("invalid hypothesis class: {0}")]
    InvalidClass(String),
    #[error("empty {0}")]
    Empty(String),
    #[error("hypothesis is not invertible: {0}")]
    NotInvertible(String),
    #[error("non-binary output {value} from member {member}")]
    NonBinary { member: usize, value: f64 },
    #[error("degenerate probe: {0}")]
    DegenerateProbe(String),
    #[error("invalid loss: {0}")]
    InvalidLoss(String),
    #[error("invalid setting: {0}")]
    InvalidSetting(String),
    #[error("wrong setting kind: expected {expected}, got {actual}")]
    WrongKind { expected: String, actual: String },
    #[error("missing Lipschitz declaration for class {0}")]
    MissingLipschitz(String),
    #[error("missing inverse class for {0}")]
    MissingInverse(String),
    #[error("target is not idempotent at {0:?}")]
    NotIdempotent(Vec<f64>),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("unknown theorem id `{0}`")]
    UnknownTheorem(String),
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
