use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported quadrature order {0}")]
    UnsupportedOrder(usize),

    #[error("level set vanishes at all three vertices of element {element}")]
    DegenerateLevelSet { element: usize },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("singular local matrix on element {element}")]
    SingularMatrix { element: usize },

    #[error("index ({row}, {col}) out of range for dimension {n}")]
    IndexOutOfRange { row: usize, col: usize, n: usize },

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("conjugate gradient broke down at iteration {iteration}: non-positive curvature {curvature:e}")]
    Breakdown { iteration: usize, curvature: f64 },

    #[error("non-positive diagonal entry {value:e} in row {row}")]
    NonPositiveDiagonal { row: usize, value: f64 },

    #[error("all degrees of freedom are constrained")]
    EmptySystem,

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}
