use thiserror::Error;

/// Errors produced by the spectral and dynamical solvers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A parameter falls outside the domain the operation supports.
    #[error("domain error: {0}")]
    Domain(String),

    /// The adaptive integrator could not make progress.
    #[error("integration failed at r = {r}: {reason}")]
    Integration { r: f64, reason: String },

    /// The integration ray does not select a unique decaying branch.
    #[error("contour configuration: {0}")]
    Contour(String),

    /// An iterative root finder did not converge.
    #[error("no convergence after {iterations} iterations (best iterate {best_re} {best_im:+}i, residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        best_re: f64,
        best_im: f64,
        residual: f64,
    },

    /// A bracketing search was given endpoints with the same predicate value.
    #[error("bracket error: {0}")]
    Bracket(String),

    /// Dense eigensolver failure.
    #[error("eigensolver failed: {0}")]
    Eigen(String),

    /// A classical trajectory neither closed nor escaped.
    #[error("trajectory error: {0}")]
    Trajectory(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by invalid input rather than numerical failure.
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Bracket(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
