use alloc::boxed::Box;
use alloc::string::String;

use crate::decompose::Decomposition;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("lattice functions live on different boxes (radius {left} vs {right})")]
    BoxMismatch { left: u32, right: u32 },
    #[error("invalid lattice box: {0}")]
    InvalidBox(String),
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("invalid coefficient field: {0}")]
    InvalidField(String),
    #[error("invalid problem parameters: {0}")]
    InvalidParams(String),
    #[error("non-finite value at site index {0}")]
    NonFinite(usize),
    #[error("the zero function is not admissible here")]
    ZeroFunction,
    #[error("constraint violated: J2 = {j2}, expected 1")]
    ConstraintViolated { j2: f64 },
    #[error("center tracks are not diverging")]
    TracksNotDiverging,
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error("bubble budget of {max} exhausted with remainder sup-norm {remainder_sup}")]
    TooManyBubbles {
        max: usize,
        remainder_sup: f64,
        partial: Box<Decomposition>,
    },
}

pub type Result<T> = core::result::Result<T, Error>;
