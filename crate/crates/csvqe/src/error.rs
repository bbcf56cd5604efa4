use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("contextual input: {0}")]
    Contextual(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
}

impl Error {
    /// Process exit code for the CLI: 2 parse, 3 resource, 4 invariant-class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            Error::Resource(_) => 3,
            _ => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
