//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QsimError {
    /// Machine-spec document is malformed or violates the schema.
    #[error("spec parse error: {0}")]
    Parse(String),

    /// A structural validation check rejected the machine.
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("zero-probability transition from state `{state}` on symbol `{symbol}`")]
    ZeroProbabilityTransition { state: String, symbol: String },

    #[error("state index {index} out of range ({count} states)")]
    IndexOutOfRange { index: usize, count: usize },

    /// Non-minimal or degenerate machine detected by a solver.
    #[error("non-minimal or degenerate machine: {0}")]
    Degenerate(String),

    /// A numerical routine failed to converge or produced an inconsistent result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("dimension cap exceeded: {0}")]
    DimensionCap(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, QsimError>;
