use thiserror::Error;

use crate::symbolic::{EvalError, ParseError};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operator {op} cannot act on {operand}")]
    KindMismatch { op: &'static str, operand: &'static str },
    #[error("form degree {0} out of range")]
    DegreeOutOfRange(usize),
    #[error("change of variables is not invertible: {0}")]
    NonInvertible(String),
    #[error("system cannot be solved for velocities: {0}")]
    Unsolvable(String),
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numeric abort: {reason}")]
    NumericAbort {
        reason: String,
        partial: Box<crate::integrate::Trajectory>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
