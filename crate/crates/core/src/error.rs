use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input failed validation. `field` names the offending value.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    /// The innovation covariance of a measurement update could not be inverted.
    #[error("singular innovation covariance; tracking parameters are ill-conditioned")]
    SingularInnovation,

    #[error("{0} is undefined for this input")]
    Undefined(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        if err.is_io() {
            Error::Io(err.into())
        } else {
            Error::Parse(err.to_string())
        }
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        if err.is_io_error() {
            match err.into_kind() {
                csv::ErrorKind::Io(io) => Error::Io(io),
                other => Error::Parse(format!("{other:?}")),
            }
        } else {
            Error::Parse(err.to_string())
        }
    }
}

/// Rejects non-finite values, naming the field.
pub(crate) fn ensure_finite(field: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(
            field,
            format!("must be finite, got {value}"),
        ))
    }
}

pub(crate) fn ensure_positive(field: &str, value: f64) -> Result<()> {
    ensure_finite(field, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(
            field,
            format!("must be > 0, got {value}"),
        ))
    }
}
