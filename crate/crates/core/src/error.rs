use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input: bad weight model, mismatched lengths, bad config.
    #[error("validation error: {0}")]
    Validation(String),

    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed in a way that should not happen for valid input.
    #[error("internal error: {0}")]
    Internal(String),

    /// Exact enumeration would exceed the configured size cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// Quantity diverges at the requested parameters (e.g. susceptibility at criticality).
    #[error("diverging quantity: {0}")]
    Diverging(String),

    /// The two-component Poisson mixture has a negative rate.
    #[error("mixture not a probability law: {0}")]
    NotAProbabilityLaw(String),
}

pub type Result<T> = std::result::Result<T, Error>;
