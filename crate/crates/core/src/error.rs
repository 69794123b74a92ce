use thiserror::Error;

/// Numerical and contract failures raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point t = {t} is not inside the weight domain (T = {lower}, +inf)")]
    Domain { t: f64, lower: f64 },

    #[error("weight evaluated to non-positive value {value} at t = {t}")]
    NonPositiveWeight { t: f64, value: f64 },

    #[error("weight has no declared integrable tail: {0}")]
    NotIntegrable(String),

    #[error("tail remainder {remainder:e} at t_max = {t_max} exceeds tolerance {tolerance:e}")]
    TailBound {
        t_max: f64,
        remainder: f64,
        tolerance: f64,
    },

    #[error("quadrature did not converge: last estimate {estimate:e}, change {change:e}")]
    Refinement { estimate: f64, change: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("degenerate ODE coefficient u''s - s'' = {value:e} at t = {t}")]
    Singular { t: f64, value: f64 },

    #[error("Gram matrix is not positive definite (t = {t})")]
    NotPositiveDefinite { t: f64 },

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("model hypothesis failed: {0}")]
    ModelHypothesis(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
