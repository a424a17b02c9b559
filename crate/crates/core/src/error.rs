use thiserror::Error;

/// Errors raised by tensor algebra, penalties and the completion solvers.
///
/// Multi-indices and mode numbers in messages are 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid shape {shape:?}: {reason}")]
    InvalidShape { shape: Vec<usize>, reason: String },

    #[error("data length {len} does not match shape {shape:?} (expected {expected})")]
    LengthMismatch {
        shape: Vec<usize>,
        len: usize,
        expected: usize,
    },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("zero divisor at index {index:?}")]
    ZeroDivisor { index: Vec<usize> },

    #[error("invalid mode pair ({k1},{k2}) for an order-{order} tensor")]
    InvalidModePair { k1: usize, k2: usize, order: usize },

    #[error("expected an order-{expected} tensor, got order {got}")]
    OrderMismatch { expected: usize, got: usize },

    #[error("inverse DFT left an imaginary residue of {residue:e} (tolerance {tolerance:e})")]
    SymmetryViolation { residue: f64, tolerance: f64 },

    #[error("SVD did not converge on Fourier slice {slice}")]
    SvdFailed { slice: usize },

    #[error("non-finite value in input to {context}")]
    NonFinite { context: &'static str },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no observed entries: completion is ill-posed")]
    EmptyObservation,

    #[error("non-finite value in solver state at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("degenerate input for {metric}: {reason}")]
    DegenerateMetric { metric: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
