use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unparseable or invalid input. Exit code 2.
    #[error("config error: {0}")]
    Config(String),

    /// The model could not produce a number. Exit code 3.
    #[error("numeric failure: {source}{}", hint.as_deref().map(|h| format!("\nhint: {h}")).unwrap_or_default())]
    Numeric {
        source: kerr_qnd::Error,
        hint: Option<String>,
    },

    /// Exit code 4.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn with_hint(self, hint: impl Into<String>) -> Self {
        match self {
            CliError::Numeric { source, .. } => CliError::Numeric { source, hint: Some(hint.into()) },
            other => other,
        }
    }
}

impl From<kerr_qnd::Error> for CliError {
    fn from(e: kerr_qnd::Error) -> Self {
        use kerr_qnd::Error as E;
        match e {
            E::InvalidParameter { .. } | E::Preset(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric { source: e, hint: None },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
