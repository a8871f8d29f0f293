//! Data types shared by compilation, administration and aggregation.
//!
//! All types serialize to the JSON Lines wire formats: suites hold one
//! [`NndTest`] per line, score files one [`ScoredCandidate`] per line.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// One annotated `(context, candidate)` tuple from a human evaluation.
///
/// `label` may be absent when `raw_scores` are present; the governing
/// [`QualityMapping`](crate::QualityMapping) then derives the label through its
/// label rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub context_id: String,
    pub context_text: String,
    pub candidate_id: String,
    pub candidate_text: String,
    pub model_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_scores: Option<Vec<f64>>,
    /// Evaluation aspect the annotation belongs to. Records with different
    /// attributes are compiled as independent streams.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Candidate {
    pub candidate_id: String,
    pub text: String,
    pub model_id: String,
}

/// A `(context, high, low)` triplet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NndTest {
    pub test_id: String,
    pub context_id: String,
    pub context_text: String,
    pub high_candidate: Candidate,
    pub low_candidate: Candidate,
    pub error_category: String,
    #[serde(default)]
    pub attribute: Option<String>,
}

impl NndTest {
    pub fn candidate(&self, side: Side) -> &Candidate {
        match side {
            Side::High => &self.high_candidate,
            Side::Low => &self.low_candidate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    High,
    Low,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::High => f.write_str("high"),
            Side::Low => f.write_str("low"),
        }
    }
}

/// Per-token natural-log probabilities for one side of one test under one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub test_id: String,
    pub side: Side,
    pub model_id: String,
    pub token_logprobs: Vec<f64>,
    pub token_count: usize,
    /// Set by scorers that could not score the candidate (e.g. it exceeded
    /// the model's maximum length). Such lines count as missing scores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unscorable: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub test_id: String,
    pub model_id: String,
    pub ll_high: f64,
    pub ll_low: f64,
    pub passed: bool,
    pub error_category: String,
    #[serde(default)]
    pub attribute: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub n_tests: usize,
    pub n_passed: usize,
    pub pass_rate: f64,
}

impl RateSummary {
    pub fn from_counts(n_passed: usize, n_tests: usize) -> Self {
        let pass_rate = if n_tests == 0 {
            0.0
        } else {
            n_passed as f64 / n_tests as f64
        };
        RateSummary {
            n_tests,
            n_passed,
            pass_rate,
        }
    }
}

/// Percentile bootstrap 95% intervals, keyed like the rates they bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceIntervals {
    pub n_resamples: usize,
    pub seed: u64,
    pub overall: (f64, f64),
    pub per_category: BTreeMap<String, (f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_attribute: Option<BTreeMap<String, (f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub model_id: String,
    pub n_tests: usize,
    pub n_passed: usize,
    pub overall_pass_rate: f64,
    /// Tests lacking a score for either side; excluded from every rate.
    #[serde(default)]
    pub n_unscored: usize,
    pub per_category: BTreeMap<String, RateSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_attribute: Option<BTreeMap<String, RateSummary>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci95: Option<ConfidenceIntervals>,
}
