use thiserror::Error;

/// Exit code for a completed run.
pub const EXIT_OK: i32 = 0;
/// Exit code for bad flags, unreadable files and invalid configuration.
pub const EXIT_USAGE: i32 = 2;
/// Exit code when a protocol run produced a cheat signal.
pub const EXIT_CHEAT: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Scenario { path: String, message: String },
    #[error(transparent)]
    Core(#[from] grover_qss::Error),
    #[error("{0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// All failures map to the usage/config code; cheating is reported through
    /// a successful run's exit code, not an error.
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}
