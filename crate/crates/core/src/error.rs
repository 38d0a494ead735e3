use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid-input: {0}")]
    InvalidInput(String),

    #[error("unsupported-modulus: {0} is not square-free")]
    UnsupportedModulus(u64),

    #[error("not-in-image: cross determinant shares a factor with gcd(q1, q2) = {q0}")]
    NotInImage { q0: u64 },

    #[error("resource-limit: {what} needs {needed}, limit is {limit}")]
    ResourceLimit {
        what: &'static str,
        needed: u64,
        limit: u64,
    },

    #[error("accuracy-failure: estimate {estimate:.6e} with error {error:.3e} after {evaluations} evaluations")]
    AccuracyFailure {
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("singularity-warning: rho = {rho:.3e} is within {limit:.3e} of the Cartan singularity")]
    SingularityWarning { rho: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
