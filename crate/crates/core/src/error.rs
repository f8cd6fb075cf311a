use thiserror::Error;

use crate::interval::Interval;

/// Errors raised anywhere in the bound computation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]: endpoints must be finite with lo <= hi")]
    InvalidInterval { lo: f64, hi: f64 },

    /// The function is not defined (or not twice differentiable) on the whole box.
    #[error("{op} is undefined on {interval}{}", line.map(|k| format!(" (codelist line {})", k + 1)).unwrap_or_default())]
    DomainViolation {
        op: &'static str,
        interval: Interval,
        line: Option<usize>,
    },

    #[error("spectral operator applied to an empty slice")]
    EmptySlice,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("expression does not depend on any variable")]
    ConstantExpression,

    #[error("malformed codelist at line {}: {reason}", line + 1)]
    MalformedCodelist { line: usize, reason: String },

    #[error("no bound rule matches codelist line {}", .0 + 1)]
    RuleDispatchGap(usize),

    #[error("matrix is not symmetric (entry ({row}, {col}) differs by {diff:e})")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("dimension {n} exceeds the vertex enumeration limit {limit}")]
    DimensionTooLarge { n: usize, limit: usize },

    #[error("reference bounds are inconsistent: {0}")]
    InconsistentInputs(String),

    #[error("point lies outside the box (component {0})")]
    PointOutsideBox(usize),

    #[error("invalid box specification: {0}")]
    BadBox(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
