use thiserror::Error;

/// Errors raised anywhere in the geometry pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("variable index {index} out of range for a jet in {num_vars} variables")]
    VariableIndex { index: usize, num_vars: usize },

    #[error("jet shape mismatch: {0}")]
    JetShape(String),

    #[error("domain error: {func} is undefined at {value}")]
    Domain { func: &'static str, value: f64 },

    #[error("syntax error at byte {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("function `{name}` at byte {offset} takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        offset: usize,
        expected: usize,
        found: usize,
    },

    #[error("point {point:?} lies outside the chart domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("rank-deficient differential: Gram determinant {gram:e} at {point:?}")]
    RankDeficient { gram: f64, point: Vec<f64> },

    #[error("symmetric eigen-solve failed: {0}")]
    EigenFailure(String),

    #[error("level set is not transverse to the chart at {point:?}")]
    NotTransverse { point: Vec<f64> },

    #[error("quadrature did not converge for {quantity}: refinement changed the value by {rel_change:e} (relative)")]
    NonConvergence { quantity: String, rel_change: f64 },

    #[error("quantity {quantity} diverges at the ideal boundary; eps > 0 is required")]
    DivergentAtBoundary { quantity: String },

    #[error("ill-conditioned fit design (cond = {cond:e})")]
    IllConditioned { cond: f64 },

    #[error("fit residual {residual:e} exceeds tolerance {tolerance:e}")]
    FitResidual { residual: f64, tolerance: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("assertion failed: {what} (lhs = {lhs:e}, rhs = {rhs:e})")]
    Assertion { what: String, lhs: f64, rhs: f64 },

    #[error("invalid surface spec: {0}")]
    Spec(String),
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;
