use thiserror::Error;

use crate::grid::Cell;

/// Errors produced by the coding, repair and analysis routines.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A parameter tuple or argument violates a structural constraint.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Field-level domain violation, e.g. inverting zero.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: need {needed} distinct positions, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// The decode system for the given (1-based) positions is singular.
    #[error("decode error: singular system for positions {positions:?}")]
    Decode { positions: Vec<usize> },

    /// Supplied symbols do not lie on a single codeword.
    #[error("inconsistent symbols: position {position} disagrees with the decoded codeword")]
    Inconsistent { position: usize },

    #[error("repair error: could not read cell {cell}: {reason}")]
    Repair { cell: Cell, reason: String },

    #[error("unsupported failure pattern: {0}")]
    UnsupportedPattern(String),

    /// Exhaustive verification would exceed the subset budget.
    #[error("exhaustive check needs {subsets} subsets, budget is {budget}; use sampled mode")]
    BudgetExceeded { subsets: u128, budget: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
