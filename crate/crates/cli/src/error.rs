use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] evdeblur::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for I/O and input data, 2 for bad arguments, 3 when the threshold
    /// search hits a non-finite energy.
    pub fn exit_code(&self) -> i32 {
        use evdeblur::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                E::NonFiniteEnergy { .. } | E::Range { .. } => 3,
                E::SearchConfig(_) | E::Validation(_) | E::DimensionMismatch { .. } => 2,
                _ => 1,
            },
            CliError::Io { .. } | CliError::Json(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
