use std::path::PathBuf;

use bandit_mdp::{InstanceError, LearnerError, MdpError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Mdp(#[from] MdpError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Shape(String),
    #[error("trace for {algorithm} seed {seed} has no recorded points")]
    EmptyTrace { algorithm: String, seed: u64 },
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}
