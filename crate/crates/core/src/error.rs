use thiserror::Error;

use crate::domain::Label;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("all weights are zero")]
    AllZeroWeights,
    #[error("weight {index} is negative or not finite ({value})")]
    InvalidWeight { index: usize, value: f64 },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid list: {0}")]
    InvalidList(String),
    #[error("gamma must lie in (0, 1), got {0}")]
    InvalidGamma(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("hypothesis class is empty")]
    EmptyClass,
    #[error("instance {0} is outside the learner's universe")]
    UnknownInstance(String),
    #[error("instance {0} has no numeric features")]
    NonNumericInstance(String),
    #[error("relative weight underflow at round {round}")]
    WeightUnderflow { round: usize },
    #[error("candidate label list is empty")]
    EmptyCandidates,
    #[error("phase {phase} dropped the true label of training example {example}")]
    PhaseFailure { phase: usize, example: usize },
    #[error("no gamma at or above {gamma_min} succeeded")]
    GammaExhausted { gamma_min: f64 },
    #[error("replay of slot {slot} in phase {phase} diverged from the recorded hypothesis")]
    NonDeterministicLearner { phase: usize, slot: usize },
    #[error("compression size {r} must be smaller than sample size {m}")]
    RTooLarge { r: usize, m: f64 },
    #[error("dataset of {available} examples cannot supply {needed}")]
    InsufficientData { needed: usize, available: usize },
    #[error("search space of {size} exceeds budget {budget}")]
    BudgetExceeded { size: f64, budget: u64 },
    #[error("sample is not realizable by the class")]
    NotRealizable,
    #[error("no subset reached coverage {target:.4}; best covered {best:.4} after {tried} candidates")]
    SearchExhausted { target: f64, best: f64, tried: usize },
    #[error("wrong-label game did not yield a consistent list ({violations} violations)")]
    GameNotConverged { violations: usize },
    #[error("label {0} is outside the alphabet")]
    LabelOutOfRange(Label),
    #[error("malformed record: {0}")]
    MalformedRecord(String),
    #[error("io: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
