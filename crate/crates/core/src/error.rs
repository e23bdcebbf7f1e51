use thiserror::Error;

/// Errors raised by geometry, assembly and time stepping.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FvmError {
    #[error("letter {letter} out of range 1..={d}")]
    InvalidLetter { letter: usize, d: usize },

    #[error("branching number d={0} must be at least 2")]
    InvalidDimension(usize),

    #[error("point has dimension {got}, expected {expected}")]
    PointDimension { got: usize, expected: usize },

    #[error("simplex points are affinely dependent")]
    DegenerateSimplex,

    #[error("integer overflow computing {what} for d={d}, m={m}")]
    Overflow { what: &'static str, d: usize, m: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("scheme requires the standard self-similar measure")]
    NonStandardMeasure,

    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("length mismatch: got {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },

    #[error("CFL violated: h={h:e} exceeds bound 2/(d^2 (d+2)^m) = {bound:e} (d={d}, m={m})")]
    CflViolation { h: f64, bound: f64, d: usize, m: usize },

    #[error("non-finite value in state at step {step}")]
    NonFinite { step: usize },

    #[error(
        "conjugate gradient did not converge in {iterations} iterations (relative residual {residual:e})"
    )]
    CgDivergence { iterations: usize, residual: f64 },

    #[error("x={x} lies above the branch point (d+2)^2/4 = {bound}")]
    BranchDomain { x: f64, bound: f64 },

    #[error(
        "matrix dimension {n} exceeds dense eigensolver budget {budget}; use decimation generation instead"
    )]
    EigenBudget { n: usize, budget: usize },

    #[error("power iteration did not converge after {iterations} iterations")]
    PowerIteration { iterations: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FvmError {
    fn from(e: std::io::Error) -> Self {
        FvmError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FvmError>;
