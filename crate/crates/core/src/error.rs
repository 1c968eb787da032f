use std::path::PathBuf;

/// Errors raised by the synthesis, preprocessing, training and reporting layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated an operation's precondition.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// The input carried no usable signal (for example an all-zero capture).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A file did not match the expected binary layout.
    #[error("malformed {kind} data: {msg}")]
    Format { kind: &'static str, msg: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
