//! Error types shared across the crate.

use std::fmt;

/// Errors produced by algebroid operations and the reduction pipeline.
#[derive(Debug, Clone)]
pub enum AlgError {
    /// Structural misuse: mismatched charts, wrong dimensions, bad degrees.
    Structural(String),
    /// An evaluation produced a non-finite value at the given chart point.
    NonFinite { op: &'static str, point: Vec<f64> },
    /// A linear solve hit a matrix that is singular beyond the rank tolerance.
    Degenerate {
        point: Vec<f64>,
        condition: f64,
        context: &'static str,
    },
    /// The kernel of a presymplectic section has non-constant dimension.
    NonConstantKernel {
        dims_seen: Vec<usize>,
        offending: Vec<Vec<f64>>,
    },
    /// A reduction hypothesis failed; `hypothesis` names the check.
    Hypothesis { hypothesis: String, detail: String },
    /// The candidate basis does not span a subalgebra.
    NotASubalgebra { residual: f64 },
    /// ker Ω restricted to the subalgebra is not an ideal; reduction impossible.
    IdealViolation { residual: f64 },
    /// Numeric blow-up during integration; carries the time reached.
    BlowUp { t: f64, norm: f64 },
    /// Unknown model name or invalid model parameters.
    Model(String),
}

impl fmt::Display for AlgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgError::Structural(msg) => write!(f, "structural error: {msg}"),
            AlgError::NonFinite { op, point } => {
                write!(f, "non-finite evaluation in {op} at {point:?}")
            }
            AlgError::Degenerate {
                point,
                condition,
                context,
            } => write!(
                f,
                "degenerate matrix in {context} at {point:?} (condition estimate {condition:e})"
            ),
            AlgError::NonConstantKernel { dims_seen, .. } => write!(
                f,
                "kernel dimension is not constant across samples (saw {dims_seen:?})"
            ),
            AlgError::Hypothesis { hypothesis, detail } => {
                write!(f, "reduction hypothesis failed [{hypothesis}]: {detail}")
            }
            AlgError::NotASubalgebra { residual } => {
                write!(f, "basis does not span a subalgebra (residual {residual:e})")
            }
            AlgError::IdealViolation { residual } => write!(
                f,
                "kernel is not an ideal of the subalgebra (residual {residual:e}); reduction impossible"
            ),
            AlgError::BlowUp { t, norm } => {
                write!(f, "state norm {norm:e} exceeded the blow-up bound at t = {t}")
            }
            AlgError::Model(msg) => write!(f, "model error: {msg}"),
        }
    }
}

impl std::error::Error for AlgError {}

pub type Result<T> = std::result::Result<T, AlgError>;

pub(crate) fn structural(msg: impl Into<String>) -> AlgError {
    AlgError::Structural(msg.into())
}
