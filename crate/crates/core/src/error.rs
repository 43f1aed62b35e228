use crate::transition::ReprShape;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum BufferError {
    #[error("transition {field} shape {got} does not match buffer shape {expected}")]
    ShapeMismatch {
        field: &'static str,
        expected: ReprShape,
        got: ReprShape,
    },
    #[error("state and next_state shapes differ ({state} vs {next_state})")]
    StatePairMismatch {
        state: ReprShape,
        next_state: ReprShape,
    },
    #[error("cannot sample from an empty buffer; collect warm-up data first")]
    Empty,
    #[error("batch size must be at least 1")]
    ZeroBatch,
}

#[derive(Error, Debug)]
pub enum MdpError {
    #[error("transition tensor has {got} entries, expected {expected}")]
    TransitionShape { expected: usize, got: usize },
    #[error("reward matrix has {got} entries, expected {expected}")]
    RewardShape { expected: usize, got: usize },
    #[error("initial distribution has {got} entries, expected {expected}")]
    InitialShape { expected: usize, got: usize },
    #[error("discount must lie in [0, 1), got {0}")]
    Discount(f64),
    #[error("state and action counts must be positive")]
    EmptySpace,
}

#[derive(Error, Debug)]
pub enum CsvError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported or malformed header: {0}")]
    Header(String),
}
