use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter `{name}` out of range: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("shape mismatch: expected length {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("bubble centers {0} and {1} coincide")]
    CoincidentCenters(usize, usize),

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },

    #[error("frequency block {nu} is singular")]
    SingularFrequency { nu: usize },

    #[error("fixed-point iteration diverged: contraction ratios {ratios:?}")]
    Divergence { ratios: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        name,
        reason: reason.into(),
    }
}
