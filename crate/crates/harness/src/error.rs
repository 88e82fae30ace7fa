use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("nothing to plot")]
    EmptyTrace,
    #[error("every steplength in the sweep failed")]
    SweepFailed,
    #[error(transparent)]
    Run(#[from] adasamp::Error),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 usage, 2 run failure, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 1,
            HarnessError::Run(adasamp::Error::InvalidConfig(_)) => 1,
            HarnessError::Run(_) | HarnessError::EmptyTrace | HarnessError::SweepFailed => 2,
            HarnessError::Io { .. } | HarnessError::Parse { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
