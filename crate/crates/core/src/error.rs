use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("qubit index {index} out of range for a {width}-qubit register")]
    QubitOutOfRange { index: usize, width: usize },

    #[error("model has no Hamiltonian terms and no jump operators")]
    EmptyModel,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("step too large: lambda*delta = {lambda_delta} (must be < {limit})")]
    StepTooLarge { lambda_delta: f64, limit: f64 },

    #[error("simulator cap exceeded: {0}")]
    CapExceeded(String),

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
