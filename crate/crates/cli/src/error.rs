use std::path::PathBuf;

use thiserror::Error;

/// Failures of the scenario runner, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("missing fixture: {0}")]
    MissingFixture(PathBuf),

    #[error("sweep parameter `{0}` is not addressable in this scenario")]
    UnknownParameter(String),

    #[error(transparent)]
    Core(#[from] cframe::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Exit status when every verdict holds.
pub const EXIT_OK: i32 = 0;
/// Exit status when at least one verdict fails.
pub const EXIT_VERDICT: i32 = 1;
/// Exit status for unreadable or invalid configs and fixtures.
pub const EXIT_PARSE: i32 = 2;
/// Exit status when a referenced fixture does not exist.
pub const EXIT_MISSING: i32 = 3;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::MissingFixture(_) => EXIT_MISSING,
            _ => EXIT_PARSE,
        }
    }
}
