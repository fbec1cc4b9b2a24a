use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("index {index} out of range 1..={max} for {what}")]
    Index { what: &'static str, index: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("numerical failure at step {step}: {message}")]
    Numerical { step: usize, message: String },

    #[error("unitarity violated: max |U^dag U - I| = {deviation:e} exceeds {tolerance:e}")]
    Unitarity { deviation: f64, tolerance: f64 },

    #[error("correlation front not captured: bond {bond} peaks at the final time sample")]
    FrontNotCaptured { bond: usize },

    #[error("argument {x} outside the supported domain |x| <= {limit}")]
    Domain { x: f64, limit: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors caused by user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Index { .. } | Error::Dimension { .. } | Error::Unsupported(_)
        )
    }
}
