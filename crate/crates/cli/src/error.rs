use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown configuration key: {0}")]
    UnknownKey(String),
    #[error("invalid configuration value: {0}")]
    TypeMismatch(String),
    #[error("inconsistent configuration: {0}")]
    Inconsistent(String),
    #[error("invalid measurement file {path}: {msg}")]
    Schema { path: PathBuf, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] spline_inverse::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::UnknownKey(_) => 3,
            CliError::TypeMismatch(_) => 4,
            CliError::Inconsistent(_) => 5,
            CliError::Schema { .. } => 6,
            CliError::Io { .. } | CliError::Core(_) => 1,
        }
    }
}
