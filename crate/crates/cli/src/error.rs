use std::path::PathBuf;

use sleeptopo_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("missing artifact {}: run `{stage}` first", path.display())]
    MissingArtifact { path: PathBuf, stage: &'static str },
    #[error("stale artifact {} (config hash differs): rerun `{stage}`", path.display())]
    StaleArtifact { path: PathBuf, stage: &'static str },
    #[error("{}: {reason}", path.display())]
    Input { path: PathBuf, reason: String },
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },
}

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn input(path: impl Into<PathBuf>, reason: impl std::fmt::Display) -> Self {
        CliError::Input {
            path: path.into(),
            reason: reason.to_string(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn core(context: impl Into<String>, source: CoreError) -> Self {
        CliError::Core {
            context: context.into(),
            source,
        }
    }

    /// 0 success, 1 configuration or input error, 2 missing or stale
    /// upstream artifact, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::MissingArtifact { .. } | CliError::StaleArtifact { .. } => 2,
            CliError::Core {
                source: CoreError::Numerical { .. },
                ..
            } => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
