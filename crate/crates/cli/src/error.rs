use serde_json::{json, Value};
use thiserror::Error;

/// Failures surfaced by the command-line front end.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config error at {path}: {message}")]
    Config {
        path: String,
        message: String,
        line: usize,
        column: usize,
    },

    #[error(transparent)]
    Core(#[from] gaussnet_core::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config { .. } => "config",
            CliError::Core(e) => e.code(),
            CliError::Io { .. } => "io",
        }
    }

    /// 2 for physically invalid inputs, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_physics() => 2,
            _ => 1,
        }
    }

    /// `{"error": {...}}` with a stable `code`.
    pub fn to_json(&self) -> Value {
        let mut body = json!({
            "code": self.code(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::Config { path, line, column, .. } = self {
            body["path"] = json!(path);
            body["line"] = json!(line);
            body["column"] = json!(column);
        }
        json!({ "error": body })
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
