use thiserror::Error;

use crate::freealg::FreeElement;

pub type Result<T> = std::result::Result<T, Error>;

/// A failed solve caused by constants in the free algebra.
#[derive(Debug, Clone)]
pub struct Obstruction {
    pub grade: usize,
    pub multidegree: Vec<u32>,
    pub constants: Vec<FreeElement>,
    /// Whether each constant's right-hand side was C-closed.
    pub c_closed: Vec<bool>,
    pub determinant: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("denominator vanishes on the specialization locus: {0}")]
    Pole(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("side mismatch: {0}")]
    SideMismatch(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("insufficient truncation: {0}")]
    Truncation(String),
    #[error("obstruction detected at grade {}, multidegree {:?}: {} constant(s)", .0.grade, .0.multidegree, .0.constants.len())]
    ObstructionDetected(Box<Obstruction>),
    #[error("inconsistent system at multidegree {0:?}")]
    Inconsistent(Vec<u32>),
}
