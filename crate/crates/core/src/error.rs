use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("quadrature did not converge on [{a}, {b}]: value {value}, error estimate {error}")]
    Quadrature {
        a: f64,
        b: f64,
        value: f64,
        error: f64,
    },

    #[error("integral diverges near {at}")]
    Divergent { at: f64 },

    #[error("argument {t} outside the admissible range ({lo}, {hi})")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("model evaluation failed: {0}")]
    Evaluation(String),

    #[error("invalid model definition: {0}")]
    ModelDefinition(String),

    #[error("transform integration failed: {0}")]
    Transform(String),

    #[error("degenerate domain: {0}")]
    Geometry(String),

    #[error("linear solver breakdown: {0}")]
    Linear(String),

    #[error("iteration did not converge after {iterations} steps (last change {last_change:e})")]
    NonConvergence { iterations: usize, last_change: f64 },

    #[error("constraint infeasible: {0}")]
    Infeasible(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
