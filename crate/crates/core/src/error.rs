//! Error types shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by callers that map errors to exit codes:
/// problems with the input data or configuration versus computations that
/// are mathematically undefined on an otherwise valid input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCategory {
    Data,
    Computation,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },

    #[error("at least two classes are required")]
    TooFewClasses,

    #[error("class `{class}` has {size} points but at least {min} are required")]
    ClassTooSmall {
        class: String,
        size: usize,
        min: usize,
    },

    #[error("degenerate dispersion: {0}")]
    DegenerateDispersion(&'static str),

    #[error("degenerate centroids: two class centroids coincide")]
    DegenerateCentroids,

    #[error("degenerate ranks: {0}")]
    DegenerateRanks(&'static str),

    #[error("target scores have zero weighted variance")]
    DegenerateTargets,

    #[error("calibration failed: {0}")]
    CalibrationFailed(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("class pair ({a}, {b}): {source}")]
    PairFailed {
        a: String,
        b: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at row {row}, column `{col}`: {msg}")]
    Parse { row: usize, col: String, msg: String },

    #[error("only {got} usable rows after filtering, at least {min} required")]
    TooFewRows { got: usize, min: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attach a human-readable context prefix, keeping the original as source.
    pub fn with_context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::TooFewClasses
            | Error::ClassTooSmall { .. }
            | Error::DegenerateDispersion(_)
            | Error::DegenerateCentroids
            | Error::DegenerateRanks(_)
            | Error::DegenerateTargets
            | Error::CalibrationFailed(_) => ErrorCategory::Computation,
            Error::PairFailed { source, .. } | Error::Context { source, .. } => source.category(),
            _ => ErrorCategory::Data,
        }
    }
}
