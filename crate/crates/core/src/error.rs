use std::path::PathBuf;

use crate::script::ScriptId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("script {0} has no invertible WX mapping")]
    NonInvertibleScript(ScriptId),

    #[error("no codepoints from a known Indic block")]
    NoIndicContent,

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid n-gram order {0}: must be at least 1")]
    InvalidOrder(usize),

    #[error("empty reference: no reference tokens to normalise by")]
    EmptyReference,

    #[error("degenerate alphabet of size {0}: redundancy needs at least 2 symbols")]
    DegenerateAlphabet(usize),

    #[error("line count mismatch: {left} vs {right}")]
    AlignmentMismatch { left: usize, right: usize },

    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("script table error: {0}")]
    Table(String),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("need at least {needed} inputs, got {got}")]
    TooFewInputs { needed: usize, got: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn format(line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attaches a file path to an error raised while processing that file.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            e @ (Error::Io { .. } | Error::InFile { .. }) => e,
            e => Error::InFile {
                path: path.into(),
                source: Box::new(e),
            },
        }
    }

    /// True for errors caused by the data rather than by usage or I/O.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::Io { .. } | Error::Manifest(_) => false,
            Error::InFile { source, .. } => source.is_data_error(),
            _ => true,
        }
    }
}
