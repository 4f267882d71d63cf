use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A Gamma factor sits on (or within tolerance of) a pole.
    #[error("pole of {factor} at argument {arg} (order {order})")]
    Pole { factor: String, arg: String, order: u32 },

    /// A recursion denominator vanishes.
    #[error("singular denominator: {0}")]
    SingularDenominator(String),

    /// A series or quadrature did not reach its accuracy target.
    #[error("precision loss in {context}: {detail} (partial value {partial_re}{partial_im:+}i)")]
    PrecisionLoss {
        context: String,
        detail: String,
        partial_re: f64,
        partial_im: f64,
    },

    /// A non-finite value appeared where a finite one is required.
    #[error("non-finite value in {context} at {location}")]
    NonFinite { context: String, location: String },

    /// A kernel was requested without regularisation.
    #[error("regularization required: {0}")]
    RegularizationRequired(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn non_finite(context: impl Into<String>, location: impl std::fmt::Display) -> Self {
        Error::NonFinite {
            context: context.into(),
            location: location.to_string(),
        }
    }

    /// True for errors that signal numerical rather than domain failure.
    pub fn is_precision_loss(&self) -> bool {
        matches!(self, Error::PrecisionLoss { .. } | Error::NonFinite { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
