use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Parameters fall outside the domain in which a bound is valid.
    #[error("bound domain violated: {0}")]
    Domain(String),
    /// A bound that must be nondecreasing in the solved density was observed
    /// decreasing during threshold search.
    #[error("bound not monotone in the solved density: {0}")]
    NonMonotone(String),
}

pub type Result<T> = std::result::Result<T, Error>;
