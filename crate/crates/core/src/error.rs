use thiserror::Error;

use crate::quantities::Unit;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unit mismatch: expected {expected}, found {found}")]
    UnitMismatch { expected: Unit, found: Unit },

    /// c·P exceeds (γ_C·B)², so no real detuning satisfies the solid-effect condition.
    #[error("solid-effect condition violated: c·P = {drive_sq:.6e} MHz² exceeds (γ_C·B)² = {larmor_sq:.6e} MHz²")]
    SeConditionViolated { drive_sq: f64, larmor_sq: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("non-finite model output at parameter {index} (value {value})")]
    NonFiniteModel { index: usize, value: f64 },

    #[error("fit failed: {0}")]
    FitFailure(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Config(_) | Error::Io { .. } => 2,
            Error::Validation(_) | Error::UnitMismatch { .. } | Error::Domain(_) => 3,
            Error::SeConditionViolated { .. } => 3,
            Error::FitFailure(_) | Error::Numerical(_) | Error::NonFiniteModel { .. } => 4,
        }
    }
}
