use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] bprm::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2: configuration, 3: input data, 4: cluster cap, 1: anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Core(e) => match e {
                bprm::Error::Config(_) | bprm::Error::DegenerateRange { .. } => 2,
                bprm::Error::CapExceeded { .. } => 4,
                bprm::Error::LengthMismatch { .. }
                | bprm::Error::EmptySample
                | bprm::Error::Json(_)
                | bprm::Error::Io(_) => 3,
                e if e.is_data_error() => 3,
                _ => 1,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
