use std::path::PathBuf;

use serde::Serialize;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Analysis(#[from] latentkit_core::Error),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot read `{path}`: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write `{path}`: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("malformed CSV in `{path}`: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("malformed JSON in `{path}`: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn code(&self) -> &'static str {
        match self {
            Error::Analysis(e) => e.code(),
            Error::Config(_) => "CONFIG_ERROR",
            Error::Read { .. } => "READ_ERROR",
            Error::Write { .. } => "WRITE_ERROR",
            Error::Csv { .. } => "MALFORMED_CSV",
            Error::Json { .. } => "MALFORMED_JSON",
        }
    }

    /// 2 for invalid parameters or unusable configuration files, 1 for
    /// failures caused by the data or the analysis.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Analysis(e) if e.is_configuration() => 2,
            Error::Config(_) | Error::Read { .. } | Error::Json { .. } => 2,
            _ => 1,
        }
    }

    pub fn report(&self, stage: Option<&str>) -> ErrorReport {
        ErrorReport {
            code: self.code().to_string(),
            message: self.to_string(),
            exit_code: self.exit_code(),
            stage: stage.map(str::to_string),
        }
    }
}

/// Contents of `error.json`.
#[derive(Clone, Debug, Serialize)]
pub struct ErrorReport {
    pub code: String,
    pub message: String,
    pub exit_code: i32,
    pub stage: Option<String>,
}
