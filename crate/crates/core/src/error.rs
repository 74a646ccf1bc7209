use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("coherence undersampled: dt = {dt} exceeds Tc/20 = {limit}")]
    Undersampled { dt: f64, limit: f64 },

    #[error("trace too short: duration {duration} is below the required {required}")]
    InsufficientDuration { duration: f64, required: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("lag {lag} is not representable on a grid of spacing {dt}")]
    OffGrid { lag: f64, dt: f64 },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("profile not normalized: integral of |f|^2 = {norm}")]
    NotNormalized { norm: f64 },

    #[error("incompatible scenario: {0}")]
    Incompatible(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("config parse error in {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },

    #[error("config validation error: field `{field}`: {reason}")]
    ConfigInvalid { field: String, reason: String },

    #[error("sweep point {index} (value {value})")]
    SweepPoint {
        index: usize,
        value: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
