use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("unknown gate label `{0}`")]
    UnknownGate(String),

    #[error("gate set `{set}` is missing required gate `{label}`")]
    MissingGate { set: String, label: String },

    #[error("invalid gate set: {0}")]
    InvalidGateSet(String),

    #[error("invalid gate targets: {0}")]
    InvalidTargets(String),

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("{count} coefficients do not fit a register of dimension {capacity}")]
    TooManyCoefficients { count: usize, capacity: usize },

    #[error("spectrum mismatch (max eigenvalue deviation {0:e})")]
    SpectrumMismatch(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("gate-set hash mismatch: table built with {table}, query uses {query}")]
    GateSetMismatch { table: String, query: String },

    #[error("entry cap of {0} reached")]
    ResourceCap(usize),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
