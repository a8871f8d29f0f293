use thiserror::Error;

use crate::model::Side;

pub type Result<T, E = NndError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum NndError {
    #[error("invalid annotation record #{index}: {reason}")]
    InvalidRecord { index: usize, reason: String },

    #[error(
        "records #{first} and #{second} share context '{context_id}' and candidate '{candidate_id}'"
    )]
    DuplicateRecord {
        context_id: String,
        candidate_id: String,
        first: usize,
        second: usize,
    },

    #[error("label '{label}' is not in the mapping taxonomy")]
    UnknownLabel { label: String },

    #[error("candidate '{candidate_id}' has raw scores but the mapping declares no label rule")]
    NoDerivationRule { candidate_id: String },

    #[error("candidate '{candidate_id}' has neither a label nor raw scores")]
    MissingLabel { candidate_id: String },

    #[error("label rule could not be applied to '{candidate_id}': {reason}")]
    LabelRule {
        candidate_id: String,
        reason: String,
    },

    #[error("invalid quality mapping: {0}")]
    InvalidMapping(String),

    #[error("score for test '{test_id}' ({side}) has no tokens")]
    EmptyTokens { test_id: String, side: Side },

    #[error("score for test '{test_id}' ({side}) is malformed: {reason}")]
    MalformedScore {
        test_id: String,
        side: Side,
        reason: String,
    },

    #[error("score does not belong to test '{test_id}': {reason}")]
    ScoreMismatch { test_id: String, reason: String },

    #[error("conflicting scores for test '{test_id}' ({side}) under model '{model_id}'")]
    ConflictingScores {
        test_id: String,
        side: Side,
        model_id: String,
    },

    #[error("cannot aggregate an empty outcome list")]
    EmptyOutcomes,

    #[error("outcomes mix models '{expected}' and '{found}'")]
    MixedModels { expected: String, found: String },

    #[error("invalid bootstrap configuration: {0}")]
    InvalidBootstrap(String),

    #[error("{source_name}: {reason}")]
    Adapter { source_name: String, reason: String },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {required} values, got {got}")]
    TooShort { required: usize, got: usize },

    #[error("input contains a non-finite value at position {0}")]
    NonFinite(usize),

    #[error("model sets differ: only in metric {only_metric:?}, only in human {only_human:?}")]
    ModelSetMismatch {
        only_metric: Vec<String>,
        only_human: Vec<String>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl NndError {
    pub(crate) fn adapter(source_name: &str, reason: impl Into<String>) -> Self {
        NndError::Adapter {
            source_name: source_name.to_string(),
            reason: reason.into(),
        }
    }
}
