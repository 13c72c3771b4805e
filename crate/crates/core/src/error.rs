use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("SemEval input line {line}: {message}")]
    SemEval { line: usize, message: String },

    #[error("CoNLL sentence {sentence}: {message}")]
    Conll { sentence: usize, message: String },

    #[error(
        "instance {id}: {message}; re-parse the corpus with the same tokenization \
         (see `sdprel::corpus::tokenize`)"
    )]
    Alignment { id: u64, message: String },

    #[error("invalid label: {0}")]
    Label(String),

    #[error("degenerate entity pair: both anchors are token {0}")]
    DegeneratePair(usize),

    #[error("no path between tokens {from} and {to}")]
    NoPath { from: usize, to: usize },

    #[error("{0}")]
    Format(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite values in layer {layer}")]
    Numeric { layer: &'static str },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("epoch {epoch}, instance {id}: {source}")]
    Training {
        epoch: usize,
        id: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error stems from bad user input (as opposed to a failure
    /// while running on valid input).
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Io { .. } | Error::Numeric { .. } | Error::Contract(_) | Error::Training { .. }
        )
    }
}
