use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong while loading data, scoring or searching.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}: invalid UTF-8 at byte offset {offset}", path.display())]
    Encoding { path: PathBuf, offset: usize },

    #[error("{}:{line}: {message}", path.display())]
    Table {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("empty query: nothing to search for")]
    EmptyQuery,

    #[error("no core alignment: the assignment is empty")]
    NoCore,

    #[error("invalid search parameters: {0}")]
    Params(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn table(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Table {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
