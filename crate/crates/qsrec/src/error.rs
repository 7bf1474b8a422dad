use std::path::PathBuf;

/// Crate-wide error type.
///
/// Variants are grouped by failure class so the command-line front end can map
/// them onto distinct exit codes (config = 2, i/o = 3, dimension = 4,
/// file format = 5).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error in {path}: {what}")]
    Format { path: PathBuf, what: String },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("empty support: block area contains no measured or projected pixel")]
    EmptySupport,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, what: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            what: what.into(),
        }
    }

    /// Process exit code for the CLI. Success is 0; error classes get
    /// distinct nonzero codes.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io { .. } => 3,
            Error::Dimension(_) => 4,
            Error::Format { .. } => 5,
            Error::EmptySupport => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
