use thiserror::Error;

use crate::cell::Cell;

/// Errors surfaced by the library. Each variant maps onto a CLI exit code.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("model is not complete (positive span of the neighborhood is not Z^d)")]
    IncompleteModel,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("grain count overflow at cell {0}")]
    Overflow(Cell),
    #[error("watchdog exceeded: {steps} topplings > bound {bound}")]
    Watchdog { steps: u128, bound: u128 },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("infeasible window boundary")]
    InfeasibleWindow,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("gadget defect in {gadget}: {defect}")]
    GadgetDefect { gadget: String, defect: String },
    #[error("layout error: {0}")]
    Layout(String),
    #[error("basis selection failed: {0}")]
    BasisSelectionFailed(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
