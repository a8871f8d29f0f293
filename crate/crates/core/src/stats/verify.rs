use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{kendall_tau, pearson, Correlation};
use crate::error::{NndError, Result};

/// One metric's score and the human ground truth per model, aligned on a
/// lexicographically sorted model list.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelScoreTable {
    models: Vec<String>,
    scores: Vec<f64>,
    human: Vec<f64>,
}

impl ModelScoreTable {
    pub fn new(scores: &BTreeMap<String, f64>, human: &BTreeMap<String, f64>) -> Result<Self> {
        let metric_keys: BTreeSet<&String> = scores.keys().collect();
        let human_keys: BTreeSet<&String> = human.keys().collect();
        if metric_keys != human_keys {
            return Err(NndError::ModelSetMismatch {
                only_metric: metric_keys
                    .difference(&human_keys)
                    .map(|s| s.to_string())
                    .collect(),
                only_human: human_keys
                    .difference(&metric_keys)
                    .map(|s| s.to_string())
                    .collect(),
            });
        }
        if scores.len() < 2 {
            return Err(NndError::TooShort {
                required: 2,
                got: scores.len(),
            });
        }
        // BTreeMap iteration is already lexicographic
        Ok(ModelScoreTable {
            models: scores.keys().cloned().collect(),
            scores: scores.values().copied().collect(),
            human: human.values().copied().collect(),
        })
    }

    pub fn models(&self) -> &[String] {
        &self.models
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn human(&self) -> &[f64] {
        &self.human
    }
}

/// Score differences over every unordered model pair `(a, b)` with `a`
/// sorted before `b`, as `score(a) - score(b)`; length `n(n-1)/2`.
pub fn gap_vectors(table: &ModelScoreTable) -> (Vec<f64>, Vec<f64>) {
    let n = table.models.len();
    let mut metric = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    let mut human = Vec::with_capacity(metric.capacity());
    for i in 0..n {
        for j in i + 1..n {
            metric.push(table.scores[i] - table.scores[j]);
            human.push(table.human[i] - table.human[j]);
        }
    }
    (metric, human)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Degeneracy {
    pub tau: bool,
    pub r: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub models: Vec<String>,
    pub n_pairs: usize,
    pub rank_tau: Option<f64>,
    pub gap_r: Option<f64>,
    pub degenerate: Degeneracy,
}

/// Rank correlation of the scores and gap correlation of the pairwise
/// differences. With two models there is a single gap, so `gap_r` is
/// reported degenerate.
pub fn verify(
    metric_scores: &BTreeMap<String, f64>,
    human_scores: &BTreeMap<String, f64>,
) -> Result<VerificationReport> {
    let table = ModelScoreTable::new(metric_scores, human_scores)?;
    let tau = kendall_tau(table.scores(), table.human())?;
    let (metric_gaps, human_gaps) = gap_vectors(&table);
    let r = if metric_gaps.len() >= 2 {
        pearson(&metric_gaps, &human_gaps)?
    } else {
        Correlation::Degenerate
    };
    Ok(VerificationReport {
        models: table.models().to_vec(),
        n_pairs: metric_gaps.len(),
        rank_tau: tau.value(),
        gap_r: r.value(),
        degenerate: Degeneracy {
            tau: tau.is_degenerate(),
            r: r.is_degenerate(),
        },
    })
}

/// Unweighted mean over the non-degenerate per-key results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroAverage {
    pub rank_tau: Option<f64>,
    pub gap_r: Option<f64>,
    pub n_tau: usize,
    pub n_r: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownReport {
    pub overall: VerificationReport,
    pub per_key: BTreeMap<String, VerificationReport>,
    pub macro_average: MacroAverage,
}

/// Verifies overall scores and each breakdown key (error category or
/// attribute). For each key, `human_by_key` supplies the human scores when
/// available; otherwise the overall human scores are used.
pub fn verify_breakdown(
    metric_overall: &BTreeMap<String, f64>,
    metric_by_key: &BTreeMap<String, BTreeMap<String, f64>>,
    human_overall: &BTreeMap<String, f64>,
    human_by_key: &BTreeMap<String, BTreeMap<String, f64>>,
) -> Result<BreakdownReport> {
    let overall = verify(metric_overall, human_overall)?;
    let mut per_key = BTreeMap::new();
    for (key, metric) in metric_by_key {
        let human = human_by_key.get(key).unwrap_or(human_overall);
        per_key.insert(key.clone(), verify(metric, human)?);
    }
    let mean = |vals: Vec<f64>| {
        let n = vals.len();
        ((n > 0).then(|| vals.iter().sum::<f64>() / n as f64), n)
    };
    let (rank_tau, n_tau) = mean(per_key.values().filter_map(|r| r.rank_tau).collect());
    let (gap_r, n_r) = mean(per_key.values().filter_map(|r| r.gap_r).collect());
    Ok(BreakdownReport {
        overall,
        per_key,
        macro_average: MacroAverage {
            rank_tau,
            gap_r,
            n_tau,
            n_r,
        },
    })
}
