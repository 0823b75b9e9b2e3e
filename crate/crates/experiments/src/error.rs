use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical failure: {0}")]
    Numerical(#[from] gsfem::Error),

    #[error("reference spectrum {0} is missing and generation is disabled")]
    MissingReference(PathBuf),

    #[error("{failed} of {total} cells out of tolerance")]
    Acceptance { failed: usize, total: usize },
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Acceptance { .. } => 1,
            ExperimentError::Config(_) | ExperimentError::Io { .. } | ExperimentError::MissingReference(_) => 2,
            ExperimentError::Numerical(_) => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| ExperimentError::Io { path, source }
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;
