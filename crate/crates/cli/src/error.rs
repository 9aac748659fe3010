use std::path::PathBuf;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// An unexpected library failure after the configuration was accepted.
    pub const INTERNAL: i32 = 1;
    pub const CONFIG: i32 = 2;
    /// The solver hit its iteration budget, or the decomposition its bubble
    /// budget. The partial report is still written.
    pub const NOT_CONVERGED: i32 = 3;
    pub const IO: i32 = 4;
    /// `verify` ran to completion but at least one check failed.
    pub const CHECKS_FAILED: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Library(#[from] zn_elliptic::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        CliError::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Io { .. } | CliError::Format { .. } => exit::IO,
            CliError::Library(_) => exit::INTERNAL,
        }
    }
}
