//! Near-negative distinction (NND) evaluation.
//!
//! Human annotations of several generated candidates per context are
//! compiled into tests pairing a high-quality candidate with a lower-quality
//! one. A model passes a test when its length-normalized log-likelihood of
//! the high candidate is strictly greater than that of the low candidate.
//! Pass rates are reported overall and per error category, and can be
//! checked against human judgments with rank and gap correlations.

pub mod adapters;
mod administer;
mod aggregate;
mod compile;
mod error;
pub mod io;
mod model;
mod normalize;
mod quality;
pub mod stats;

pub use administer::{
    administer_suite, administer_test, sequence_log_likelihood, Administration, ScoreIndex,
};
pub use aggregate::{aggregate, BootstrapConfig, GroupKeys, DEFAULT_RESAMPLES};
pub use compile::{compile_suite, generate_pairs, group_by_context, test_id, validate_records};
pub use error::{NndError, Result};
pub use model::{
    AnnotationRecord, Candidate, ConfidenceIntervals, NndTest, RateSummary, ScoredCandidate, Side,
    SuiteResult, TestOutcome,
};
pub use normalize::NormalizationConfig;
pub use quality::{
    assign_quality, Comparability, ComparabilitySpec, LabelRule, MappingConfig, Quality,
    QualityMapping, ScoreLabel,
};
