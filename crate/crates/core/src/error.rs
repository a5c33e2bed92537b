use thiserror::Error;

/// Errors raised by the numerical routines and the command-line layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge: {0}")]
    Convergence(String),
    #[error("integrand does not decay at the truncation edge: {0}")]
    Decay(String),
    #[error("bath window error: {0}")]
    Window(String),
    #[error("recurrence guard violated: {0}")]
    Recurrence(String),
    #[error("system too large for dense reference: {0}")]
    Size(String),
    #[error("unsupported system specification: {0}")]
    UnsupportedSpec(String),
    #[error("unsupported correlator: {0}")]
    UnsupportedCorrelator(String),
    #[error("unsupported continuation: {0}")]
    UnsupportedContinuation(String),
    #[error("step size not converged: {0}")]
    StepSize(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Configuration problems map to exit code 2, everything else to 1.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Recurrence(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
