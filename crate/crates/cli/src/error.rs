use std::path::PathBuf;

use thiserror::Error;

/// Everything that can stop a run. [`CliError::exit_code`] maps each variant
/// onto the process exit status: 2 for bad configuration or input, 1 for
/// failures while computing or writing results.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ReadConfig {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config {path}: {source}")]
    ParseConfig {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("config has no `{0}` block")]
    MissingBlock(&'static str),
    #[error("no seed: set `seed` in the config or pass --seed")]
    MissingSeed,
    #[error("invalid `{block}` block: {reason}")]
    InvalidConfig { block: &'static str, reason: String },
    #[error("cannot read input {source_name}: {source}")]
    ReadInput {
        source_name: String,
        source: std::io::Error,
    },
    #[error("input line {line}: `{text}` is not a number")]
    BadInput { line: usize, text: String },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Runtime(String),
    #[error("no run found in {0}")]
    MissingRun(PathBuf),
    #[error("{dir} mixes outputs of different configs ({first} vs {second} in {file})")]
    MixedHashes {
        dir: PathBuf,
        first: String,
        second: String,
        file: String,
    },
    #[error("unreadable run file {path}: {reason}")]
    CorruptRun { path: PathBuf, reason: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ReadConfig { .. }
            | CliError::ParseConfig { .. }
            | CliError::MissingBlock(_)
            | CliError::MissingSeed
            | CliError::InvalidConfig { .. }
            | CliError::ReadInput { .. }
            | CliError::BadInput { .. } => 2,
            CliError::Write { .. }
            | CliError::Runtime(_)
            | CliError::MissingRun(_)
            | CliError::MixedHashes { .. }
            | CliError::CorruptRun { .. } => 1,
        }
    }

    pub(crate) fn invalid(block: &'static str, e: impl std::fmt::Display) -> Self {
        CliError::InvalidConfig {
            block,
            reason: e.to_string(),
        }
    }

    pub(crate) fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
