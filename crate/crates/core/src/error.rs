use thiserror::Error;

/// Failure while parsing an expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown variable z{index} at byte {pos}: expected z1..z{n}")]
    UnknownVariable { pos: usize, index: usize, n: usize },
}

/// Failure while evaluating an expression jet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero (pole hit)")]
    PoleHit,
    #[error("logarithm of zero (branch point)")]
    BranchPoint,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),
    #[error("point is not regular: |det Im dF| = {det:e} below threshold {threshold:e}")]
    NotRegular { det: f64, threshold: f64 },
    #[error("Newton inversion diverged after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("finite-difference neighbour left the regular domain")]
    StepTooLarge,
    #[error("metric is degenerate (min |eigenvalue| = {min_abs_eigenvalue:e})")]
    Degenerate { min_abs_eigenvalue: f64 },
    #[error("bilinear form is degenerate")]
    DegenerateForm,
    #[error("invalid manifold spec: {0}")]
    SpecInvalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
