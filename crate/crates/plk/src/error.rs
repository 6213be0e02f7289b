use std::fmt;
use std::process::ExitCode;

/// Process exit statuses. `Pass` is the only zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Pass = 0,
    Fail = 1,
    Usage = 2,
    Parse = 3,
    Schema = 4,
    UnknownBuiltin = 5,
    Runtime = 6,
}

impl From<Exit> for ExitCode {
    fn from(e: Exit) -> Self {
        ExitCode::from(e as u8)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("cannot parse {path}: {message}")]
    Parse { path: String, message: String },
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("unknown builtin: {0}")]
    UnknownBuiltin(String),
    #[error("{0}")]
    Core(CoreError),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// `plk_core::Error` with a `std::error::Error` impl.
#[derive(Debug)]
pub struct CoreError(pub plk_core::Error);

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<plk_core::Error> for CliError {
    fn from(e: plk_core::Error) -> Self {
        CliError::Core(CoreError(e))
    }
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Usage(_) => Exit::Usage,
            CliError::Parse { .. } => Exit::Parse,
            CliError::Schema(_) => Exit::Schema,
            CliError::UnknownBuiltin(_) => Exit::UnknownBuiltin,
            CliError::Core(_) | CliError::Io { .. } => Exit::Runtime,
        }
    }
}
