use thiserror::Error;

use crate::expr::{EvalError, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("singular argument is not affine: {0}")]
    NonAffineSingularity(String),
    #[error("no sign assigned to form {0}")]
    UnassignedForm(String),
    #[error("affine form has no nonzero finite coefficient")]
    DegenerateForm,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("no branch covers sign vector {0}")]
    CoverageGap(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("one-sided centers differ across axes: {0} vs {1}")]
    CenterMismatch(f64, f64),
    #[error("no strong tangent hyperplane: criterion residual {residual}")]
    NoStrongTangent { residual: f64, would_be: [f64; 3] },
    #[error("quadrature did not converge on [{a}, {b}] (error estimate {estimate})")]
    NonConvergent { a: f64, b: f64, estimate: f64 },
    #[error("class violation: {0}")]
    ClassViolation(String),
    #[error("half-line compatibility violated: {0}")]
    Compatibility(String),
}
