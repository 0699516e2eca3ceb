use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Burr Type XII shapes with `s1 * s2 <= 1` have no finite mean, so no
    /// unit-mean scale exists.
    #[error("Burr residual has no finite mean: s1 * s2 = {product} must exceed 1")]
    MeanNonexistence { product: f64 },

    /// A numerical routine failed to reach its tolerance.
    #[error("numerical error: {message}")]
    Numerical { message: String },

    /// Non-finite log-likelihood contribution.
    #[error("non-finite log-likelihood term at index {index}: {value}")]
    NonFiniteTerm { index: usize, value: f64 },

    /// Malformed input file.
    #[error("format error at row {row}: {message}")]
    Format { row: usize, message: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Zero-variance input where a variance is required.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical {
            message: msg.into(),
        }
    }

    /// True for errors caused by numerical failure rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. } | Error::NonFiniteTerm { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
