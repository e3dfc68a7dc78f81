use thiserror::Error;

/// Errors raised by model construction, transforms, energies and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("child index {index} is not in 1..={branching}")]
    InvalidChildIndex { index: usize, branching: usize },

    #[error("invalid address {address}: {reason}")]
    InvalidAddress { address: String, reason: String },

    #[error("cannot parse address {input:?}: {reason}")]
    ParseAddress { input: String, reason: String },

    #[error("tree with {leaves} leaves exceeds the configured leaf cap {cap}")]
    ResourceCap { leaves: usize, cap: usize },

    #[error("function or system belongs to a different tree")]
    TreeMismatch,

    #[error("{what} = {value} is outside the admissible range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("model {model} has no Ahlfors exponent")]
    NotAhlfors { model: &'static str },

    #[error("parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("unknown wavelet coefficient id {id} (system has {count} wavelets)")]
    UnknownCoefficient { id: usize, count: usize },

    #[error("function is not in Ker Π_λ with zero mean; offending coefficients: {}", offending.join(", "))]
    Precondition { offending: Vec<String> },

    #[error("coercivity basis is empty for lambda = {lambda}")]
    EmptyBasis { lambda: f64 },

    #[error("Gram matrix is not positive definite: pivot {pivot_index} = {pivot_value}")]
    NotPositiveDefinite { pivot_index: usize, pivot_value: f64 },

    #[error("conjugate gradient did not converge in {iterations} iterations (last residual {})", residual_history.last().copied().unwrap_or(f64::NAN))]
    NotConverged {
        iterations: usize,
        residual_history: Vec<f64>,
    },

    #[error("point evaluation is continuous only for s > gamma/2 = {bound:.4}; got s = {s}")]
    GreenThreshold { s: f64, bound: f64 },

    #[error("hypothesis s < beta violated: s = {s}, beta = {beta}")]
    HypothesisViolated { s: f64, beta: f64 },

    #[error("operation requires the Sierpinski model")]
    NotSierpinski,

    #[error("right-hand side has length {got}, basis has {expected} functions")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
