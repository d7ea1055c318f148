//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Matrix dimensions do not line up for the requested operation.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// An index is outside the valid range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// A coefficient or input entry is NaN or infinite.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A configuration violates its invariants (e.g. zero iterations).
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// A dictionary atom has near-zero stacked norm; greedy selection is
    /// undefined for such atoms.
    #[error("dictionary atom {0} has stacked norm below 1e-14")]
    ZeroAtom(usize),

    /// A signal (or denominator) is all-zero where a nonzero one is required.
    #[error("zero signal: {0}")]
    ZeroSignal(String),

    /// Invalid room geometry for the image-source generator.
    #[error("geometry: {0}")]
    Geometry(String),

    /// Malformed text input (PLYM1 files, signal files, configs).
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// An error from a per-column coder call, tagged with the column index.
    #[error("column {col}: {source}")]
    Column {
        col: usize,
        #[source]
        source: Box<Error>,
    },

    /// An error from a pipeline stage, tagged with stage and seed context.
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps an error with pipeline stage context.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Wraps an error with the column index it occurred at.
    pub fn at_column(self, col: usize) -> Self {
        Error::Column {
            col,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
