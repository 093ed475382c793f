use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flag combination or environment; exits 1 like a parse failure.
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: ed_align::Error,
    },

    #[error(transparent)]
    Core(#[from] ed_align::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
