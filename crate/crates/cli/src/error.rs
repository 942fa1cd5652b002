use std::path::PathBuf;

use outreach_core::Error as CoreError;

/// Failure of a CLI command, carrying the process exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    /// 0 success, 2 config error, 3 infeasible, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Output { .. } => 2,
            Self::Infeasible(_) => 3,
            Self::Numerical(_) => 4,
        }
    }

    /// Wraps a library error raised while handling config field `field`.
    pub fn from_core(field: &str, e: CoreError) -> Self {
        match e {
            CoreError::Infeasible(i) => Self::Infeasible(i.to_string()),
            CoreError::NotConverged { .. } | CoreError::Supercritical { .. } | CoreError::Unbounded => {
                Self::Numerical(e.to_string())
            }
            other => Self::Config(format!("{field}: {other}")),
        }
    }
}
