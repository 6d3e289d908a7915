use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON on line {line}: {source}")]
    MalformedLine {
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("document set {0:?} has zero sentences")]
    EmptyDocumentSet(String),

    #[error("no references for set {0:?}")]
    NoReferences(String),

    #[error("invalid sentence id {id} (document set has {len} sentences)")]
    InvalidSentence { id: usize, len: usize },

    #[error("pairwise features need two distinct sentences, got {0} twice")]
    SamePair(usize),

    #[error("word {0:?} does not occur in the document set")]
    UnknownWord(String),

    #[error("sentence {0} is already part of the summary")]
    AlreadySelected(usize),

    #[error("exhaustive search supports at most {max} sentences, got {n}")]
    TooManySentences { n: usize, max: usize },

    #[error("empty reference list")]
    EmptyReferences,

    #[error("target summary for set {0:?} is missing; run make_target first")]
    MissingTarget(String),

    #[error("invalid feature config: {0}")]
    InvalidFeatureConfig(String),

    #[error("invalid trainer config: {0}")]
    InvalidTrainerConfig(String),

    #[error("model dimension {model} does not match feature registry dimension {registry}")]
    DimensionMismatch { model: usize, registry: usize },

    #[error("non-finite feature value in constraint for example {0}")]
    NonFinite(usize),

    #[error("working set is empty")]
    EmptyWorkingSet,

    #[error("training data is empty")]
    NoTrainingData,

    #[error("unknown feature group {name:?}; valid names: {valid}")]
    UnknownGroup { name: String, valid: String },

    #[error("prediction/reference mismatch: {0}")]
    IdMismatch(String),

    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),

    #[error("model file error: {0}")]
    ModelFile(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
