use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported exponent q = {0}: the Hölder bound requires q > 1")]
    UnsupportedExponent(f64),

    #[error("|f'|^q is not quasi-convex on [{a}, {b}] (max violation {max_violation:e} over {samples} samples)")]
    NotQuasiConvex {
        a: f64,
        b: f64,
        max_violation: f64,
        samples: usize,
    },

    #[error("reference integration did not converge within depth {0}")]
    NonConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
