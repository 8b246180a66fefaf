use std::io;
use std::path::PathBuf;

use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },

    #[error(transparent)]
    Model(#[from] probmorph::Error),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("{failures} law check(s) failed")]
    LawFailure { failures: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if e.is_numerical() => 3,
            CliError::Verification(_) => 3,
            CliError::LawFailure { .. } => 4,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Csv { .. } => "csv",
            CliError::Model(e) if e.is_numerical() => "numerical",
            CliError::Model(_) => "schema",
            CliError::Verification(_) => "numerical",
            CliError::LawFailure { .. } => "law-failure",
        }
    }

    /// The document written to standard error.
    pub fn to_json(&self) -> Value {
        json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
            }
        })
    }
}
