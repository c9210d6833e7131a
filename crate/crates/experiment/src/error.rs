use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] simsearch_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Data {
        path: PathBuf,
        #[source]
        source: simsearch_core::Error,
    },

    #[error("configuration: {0}")]
    Config(String),

    #[error("gold standard cache: {0}")]
    Cache(String),

    /// An approximate answer is closer than the exact one at the same rank.
    #[error("sanity check failed: {0}")]
    Sanity(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
