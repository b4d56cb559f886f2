use std::path::PathBuf;

use qprobe_core::error::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },
    #[error("{0}")]
    Integration(CoreError),
    #[error("{0}")]
    Infeasible(CoreError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config { .. } => 2,
            CliError::Integration(_) => 3,
            CliError::Infeasible(_) => 4,
        }
    }

    /// Sorts a core error into the matching exit class.
    pub fn from_core(config: &std::path::Path, e: CoreError) -> Self {
        match e {
            CoreError::IntegrationFailure { .. } => CliError::Integration(e),
            CoreError::Infeasible(_) => CliError::Infeasible(e),
            other => CliError::Config {
                path: config.to_path_buf(),
                message: other.to_string(),
            },
        }
    }
}
