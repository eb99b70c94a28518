use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vocabulary is empty")]
    EmptyVocabulary,

    #[error("invalid word {word:?}: {reason}")]
    InvalidWord { word: String, reason: String },

    #[error("all corpus weights are zero after reweighting")]
    AllZeroWeights,

    #[error("models do not share an alphabet")]
    AlphabetMismatch,

    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),

    #[error("distribution is not normalized (sum = {sum})")]
    NotNormalized { sum: f64 },

    #[error("array shapes do not match ({left} vs {right})")]
    ShapeMismatch { left: usize, right: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("word {word:?} has probability zero under the model")]
    ZeroProbabilityWord { word: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
