use std::path::PathBuf;

use thiserror::Error;

/// Errors shared across dataset preparation, benchmarking, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Parse(#[from] crate::ntriples::ParseError),
    #[error(transparent)]
    Store(#[from] crate::store::StoreError),
    #[error(transparent)]
    Term(#[from] crate::model::TermError),
    #[error(transparent)]
    Analysis(#[from] crate::analysis::AnalysisError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("infeasible profile: {0}")]
    InfeasibleProfile(String),
    #[error("malformed run file {path}: {message}")]
    RunFile { path: PathBuf, message: String },
}

impl Error {
    pub fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Error::Config(message.into())
    }
}
