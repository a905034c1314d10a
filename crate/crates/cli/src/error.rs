use std::process::ExitCode;

use thiserror::Error;

/// Failures mapped onto the process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unparseable or invalid configuration, unknown inequality id, missing
    /// columns, incompatible inputs.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("trajectory escaped at t = {t}: |u|_q = {norm:e} exceeds {ceiling:e}")]
    Escaped { t: f64, norm: f64, ceiling: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 4,
            CliError::Escaped { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Other(_) => 1,
        })
    }
}

impl From<nsap_core::Error> for CliError {
    fn from(e: nsap_core::Error) -> Self {
        use nsap_core::Error as E;
        match e {
            E::NumericalFailure { .. } | E::NonFinite(_) => CliError::Numerical(e.to_string()),
            E::Io(io) => CliError::Other(io.into()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;
