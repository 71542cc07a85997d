use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("XML parse error at byte {offset}: {message}")]
    Xml { offset: u64, message: String },

    #[error("JSON error at line {line}: {message}")]
    Json { line: usize, message: String },

    #[error("CSV error: {0}")]
    Csv(String),

    #[error("malformed {format} data: {message}")]
    Format {
        format: &'static str,
        message: String,
    },

    #[error("invalid config: {0}")]
    Config(String),

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("empty vocabulary: no term occurs in both corpora within the max-df limit")]
    EmptyVocabulary,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(
        "CCA did not converge: requested {requested} dimensions but the regularized effective rank is {effective_rank}"
    )]
    CcaNotConverged {
        requested: usize,
        effective_rank: usize,
    },

    #[error("manifest validation failed: {message} (ids: {})", ids.join(", "))]
    Validation { message: String, ids: Vec<String> },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(format: &'static str, message: impl Into<String>) -> Self {
        Error::Format {
            format,
            message: message.into(),
        }
    }

    pub(crate) fn contract(message: impl Into<String>) -> Self {
        Error::Contract(message.into())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Csv(err.to_string())
    }
}
