use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] floquet_tfim::Error),
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<CliError>,
    },
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        CliError::Context { context: context.into(), source: Box::new(self) }
    }

    /// 2 for bad input, 3 for numerical failures, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        use floquet_tfim::Error as E;
        match self {
            CliError::Core(E::Numerical { .. } | E::Unitarity { .. } | E::FrontNotCaptured { .. }) => 3,
            CliError::Core(_) | CliError::UnknownScenario(_) | CliError::Usage(_) => 2,
            CliError::Io { .. } => 1,
            CliError::Context { source, .. } => source.exit_code(),
        }
    }
}
