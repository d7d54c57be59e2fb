use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced by the conceptvec pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] io::Error),

    /// Input does not conform to one of the file formats.
    #[error("{source_name}:{line}: {message}")]
    Format {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("nothing to train on")]
    NothingToTrain,

    #[error("vocabulary does not match corpus: {0}")]
    VocabularyMismatch(String),

    #[error("non-finite parameter detected after epoch {epoch} (matrix {matrix}, row {row})")]
    NonFinite {
        epoch: usize,
        matrix: &'static str,
        row: usize,
    },

    #[error("empty BOC")]
    EmptyBoc,

    #[error("no embeddable concepts ({skipped} concepts missing from the embedding store)")]
    NoEmbeddableConcepts { skipped: usize },

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("duplicate document id {0}")]
    DuplicateDocument(String),

    #[error("redirect cycle through {0}")]
    RedirectCycle(String),

    #[error("unknown key {0}")]
    UnknownKey(String),
}

impl Error {
    pub(crate) fn format(
        source_name: impl Into<String>,
        line: usize,
        message: impl Into<String>,
    ) -> Self {
        Error::Format {
            source_name: source_name.into(),
            line,
            message: message.into(),
        }
    }

    /// Whether the error stems from malformed input or usage rather than from
    /// the data itself (empty vocabulary, missing embeddings, ...).
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io(_)
                | Error::Format { .. }
                | Error::Config(_)
                | Error::DimensionMismatch { .. }
        )
    }
}
