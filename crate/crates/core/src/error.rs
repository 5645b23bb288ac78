use thiserror::Error;

/// Errors reported by this crate.
#[derive(Error, Debug)]
pub enum Error {
    /// Underlying I/O failure while reading or writing a file.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A line of an input file could not be parsed or failed validation.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// Arguments or data violate a precondition of the requested operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A statistic is undefined on the given data (e.g. zero variance).
    #[error("undefined statistic: {0}")]
    Undefined(String),
}

impl Error {
    pub(crate) fn parse(path: &str, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
