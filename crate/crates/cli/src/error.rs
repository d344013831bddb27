use std::path::Path;

use thiserror::Error;

/// Failures surfaced by the command line, each with its exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {field}: {reason}")]
    Config { field: &'static str, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("divergence in method {method} at t = {t}: {reason}")]
    Divergence {
        method: String,
        t: f64,
        reason: String,
    },
    #[error("validation failed: first failing check: {check}")]
    Validate { check: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 1,
            CliError::Io { .. } => 2,
            CliError::Divergence { .. } => 3,
            CliError::Validate { .. } => 4,
        }
    }

    pub fn config(field: &'static str, reason: impl Into<String>) -> Self {
        CliError::Config {
            field,
            reason: reason.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Maps a library error raised while building parameters.
    pub fn from_core_config(e: dce_kerr::Error) -> Self {
        let field = match &e {
            dce_kerr::Error::InvalidParameter { field, .. } => field,
            dce_kerr::Error::InvalidDimension { .. } => "dim",
            dce_kerr::Error::InvalidGrid(_) => "dt",
            _ => "config",
        };
        CliError::config(field, e.to_string())
    }

    /// Maps a library error raised while integrating `method`.
    pub fn from_core_run(method: &str, e: dce_kerr::Error) -> Self {
        match e {
            dce_kerr::Error::Divergence { t, .. }
            | dce_kerr::Error::BlowUp { t, .. }
            | dce_kerr::Error::Pole { t }
            | dce_kerr::Error::RegimeBreakdown { t, .. }
            | dce_kerr::Error::NotHermitian { t, .. } => CliError::Divergence {
                method: method.to_string(),
                t,
                reason: e.to_string(),
            },
            other => CliError::from_core_config(other),
        }
    }
}
