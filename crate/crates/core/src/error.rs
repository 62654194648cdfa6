use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the open interval (-1, 1)")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("root solve did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    Overflow(String),

    #[error("state left (-1, 1) at step {step}: sup|u| = {sup}")]
    BarrierViolation { step: u64, sup: f64 },

    #[error("explicit drift unstable: dt = {dt} needs dt * (C_F + 1/lambda) < 1 (got {product})")]
    StabilityGuard { dt: f64, product: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("schema version mismatch: expected {expected:?}, found {found:?}")]
    SchemaVersion { expected: String, found: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("trajectory {id} (seed {seed}) failed: {source}")]
    Trajectory {
        id: u64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Process exit code: 1 domain/hypothesis failure, 2 config error, 3 I/O error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::SchemaVersion { .. } | Error::Format { .. } => 2,
            Error::Io { .. } => 3,
            Error::Trajectory { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}

pub(crate) fn check_open_unit(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { what, value })
    }
}
