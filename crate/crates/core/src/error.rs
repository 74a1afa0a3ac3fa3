use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{func}: argument outside domain ({reason})")]
    Domain { func: &'static str, reason: String },

    #[error("{0}: integral diverges")]
    Divergence(&'static str),

    #[error(
        "integration did not converge in {context}: estimate {estimate:.6e}, \
         error {error:.3e}, requested {tolerance:.3e}"
    )]
    Integration {
        context: &'static str,
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("derivative order {order} exceeds supported bound {max}")]
    OrderTooLarge { order: usize, max: usize },

    #[error("probability {value:.3e} is negative beyond the clamp threshold")]
    NegativeProbability { value: f64 },

    #[error("event {event} does not belong to the {expected} association mode")]
    EventMismatch {
        event: &'static str,
        expected: &'static str,
    },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
