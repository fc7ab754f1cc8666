use std::path::PathBuf;

use desmoke_core::Error as CoreError;

/// Failure of a subcommand, carrying the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Io(String),

    #[error("{0}")]
    Processing(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Processing(_) => 4,
        }
    }

    pub fn io_at(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NotFound(_)
            | CoreError::UnsupportedFormat(_)
            | CoreError::UnsupportedBitDepth { .. }
            | CoreError::Decode { .. }
            | CoreError::Write { .. }
            | CoreError::Io(_) => CliError::Io(e.to_string()),
            CoreError::InvalidParams(_) => CliError::Usage(e.to_string()),
            _ => CliError::Processing(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Processing(e.to_string())
    }
}

pub(crate) fn sidecar_path(path: &std::path::Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}
