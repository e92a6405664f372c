use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config key '{key}'{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config { key: String, line: Option<usize>, message: String },

    #[error("{module}: {source}")]
    Module {
        module: &'static str,
        #[source]
        source: confam::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for configuration and input errors, 3 for numerical failures,
    /// 4 for I/O errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Io { .. } => 4,
            CliError::Module { source, .. } if source.is_io() => 4,
            CliError::Module { source, .. } if source.is_numeric() => 3,
            CliError::Module { .. } => 2,
        }
    }
}

/// Attaches a module name to core errors.
pub(crate) trait InModule<T> {
    fn module(self, module: &'static str) -> Result<T, CliError>;
}

impl<T> InModule<T> for confam::Result<T> {
    fn module(self, module: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Module { module, source })
    }
}
