use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("index {index} out of range (size {size})")]
    Index { index: usize, size: usize },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("unsupported placement strategy: {0}")]
    UnsupportedStrategy(String),

    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    #[error("invalid layer: {0}")]
    InvalidLayer(String),

    #[error("root {0} is not a participant")]
    InvalidRoot(usize),

    #[error("fanout needs at least two data qubits, got {0}")]
    TrivialFanout(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("alpha = {alpha} is outside the domain of this bound: {reason}")]
    OutOfDomain { alpha: f64, reason: String },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_index(index: usize, size: usize) -> Result<()> {
    if index < size {
        Ok(())
    } else {
        Err(Error::Index { index, size })
    }
}
