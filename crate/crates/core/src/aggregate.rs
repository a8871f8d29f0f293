//! Pass-rate aggregation with optional percentile-bootstrap intervals.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NndError, Result};
use crate::model::{ConfidenceIntervals, RateSummary, SuiteResult, TestOutcome};

pub const DEFAULT_RESAMPLES: usize = 1000;

/// Which breakdowns to compute next to the overall rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupKeys {
    pub category: bool,
    pub attribute: bool,
}

impl Default for GroupKeys {
    fn default() -> Self {
        GroupKeys {
            category: true,
            attribute: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    pub seed: u64,
}

impl BootstrapConfig {
    pub fn with_seed(seed: u64) -> Self {
        BootstrapConfig {
            n_resamples: DEFAULT_RESAMPLES,
            seed,
        }
    }
}

/// Aggregates outcomes of one model.
///
/// `per_attribute` is only filled when requested and at least one outcome
/// carries an attribute. The result is invariant under permutation of
/// `outcomes`, bootstrap intervals included.
pub fn aggregate(
    outcomes: &[TestOutcome],
    keys: GroupKeys,
    bootstrap: Option<&BootstrapConfig>,
) -> Result<SuiteResult> {
    let first = outcomes.first().ok_or(NndError::EmptyOutcomes)?;
    if let Some(other) = outcomes.iter().find(|o| o.model_id != first.model_id) {
        return Err(NndError::MixedModels {
            expected: first.model_id.clone(),
            found: other.model_id.clone(),
        });
    }

    let mut sorted: Vec<&TestOutcome> = outcomes.iter().collect();
    sorted.sort_by(|a, b| a.test_id.cmp(&b.test_id));

    let n_passed = sorted.iter().filter(|o| o.passed).count();
    let per_category = if keys.category {
        rates_by(&sorted, |o| Some(o.error_category.as_str()))
    } else {
        BTreeMap::new()
    };
    let per_attribute = if keys.attribute && sorted.iter().any(|o| o.attribute.is_some()) {
        Some(rates_by(&sorted, |o| o.attribute.as_deref()))
    } else {
        None
    };

    let ci95 = match bootstrap {
        Some(cfg) => Some(bootstrap_intervals(
            &sorted,
            keys.category,
            per_attribute.is_some(),
            cfg,
        )?),
        None => None,
    };

    Ok(SuiteResult {
        model_id: first.model_id.clone(),
        n_tests: sorted.len(),
        n_passed,
        overall_pass_rate: n_passed as f64 / sorted.len() as f64,
        n_unscored: 0,
        per_category,
        per_attribute,
        ci95,
    })
}

fn rates_by<'a>(
    outcomes: &[&'a TestOutcome],
    key: impl Fn(&'a TestOutcome) -> Option<&'a str>,
) -> BTreeMap<String, RateSummary> {
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for o in outcomes {
        if let Some(k) = key(o) {
            let entry = counts.entry(k).or_default();
            entry.1 += 1;
            if o.passed {
                entry.0 += 1;
            }
        }
    }
    counts
        .into_iter()
        .map(|(k, (passed, total))| (k.to_string(), RateSummary::from_counts(passed, total)))
        .collect()
}

/// Index of each outcome's key within the sorted key list, if any.
fn key_slots<'a>(
    outcomes: &[&'a TestOutcome],
    key: impl Fn(&'a TestOutcome) -> Option<&'a str>,
) -> (Vec<String>, Vec<Option<usize>>) {
    let mut names: Vec<&str> = outcomes.iter().filter_map(|o| key(o)).collect();
    names.sort_unstable();
    names.dedup();
    let slots = outcomes
        .iter()
        .map(|o| key(o).map(|k| names.binary_search(&k).expect("key collected above")))
        .collect();
    (names.into_iter().map(str::to_string).collect(), slots)
}

fn bootstrap_intervals(
    outcomes: &[&TestOutcome],
    by_category: bool,
    by_attribute: bool,
    cfg: &BootstrapConfig,
) -> Result<ConfidenceIntervals> {
    if cfg.n_resamples == 0 {
        return Err(NndError::InvalidBootstrap(
            "n_resamples must be positive".into(),
        ));
    }
    let n = outcomes.len();
    let (cat_names, cat_slots) = key_slots(outcomes, |o| Some(o.error_category.as_str()));
    let (attr_names, attr_slots) = key_slots(outcomes, |o| o.attribute.as_deref());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut overall = Vec::with_capacity(cfg.n_resamples);
    let mut cat_rates = vec![Vec::with_capacity(cfg.n_resamples); cat_names.len()];
    let mut attr_rates = vec![Vec::with_capacity(cfg.n_resamples); attr_names.len()];
    let mut cat_counts = vec![(0usize, 0usize); cat_names.len()];
    let mut attr_counts = vec![(0usize, 0usize); attr_names.len()];

    for _ in 0..cfg.n_resamples {
        let mut passed = 0usize;
        cat_counts.fill((0, 0));
        attr_counts.fill((0, 0));
        for _ in 0..n {
            let i = rng.gen_range(0..n);
            let hit = usize::from(outcomes[i].passed);
            passed += hit;
            if let Some(s) = cat_slots[i] {
                cat_counts[s].0 += hit;
                cat_counts[s].1 += 1;
            }
            if let Some(s) = attr_slots[i] {
                attr_counts[s].0 += hit;
                attr_counts[s].1 += 1;
            }
        }
        overall.push(passed as f64 / n as f64);
        // a key absent from a resample contributes no value for that resample
        for (rates, &(p, t)) in cat_rates.iter_mut().zip(&cat_counts) {
            if t > 0 {
                rates.push(p as f64 / t as f64);
            }
        }
        for (rates, &(p, t)) in attr_rates.iter_mut().zip(&attr_counts) {
            if t > 0 {
                rates.push(p as f64 / t as f64);
            }
        }
    }

    let interval_map = |names: Vec<String>, mut rates: Vec<Vec<f64>>| {
        names
            .into_iter()
            .zip(rates.iter_mut())
            .filter(|(_, r)| !r.is_empty())
            .map(|(k, r)| (k, percentile_interval(r)))
            .collect::<BTreeMap<_, _>>()
    };

    Ok(ConfidenceIntervals {
        n_resamples: cfg.n_resamples,
        seed: cfg.seed,
        overall: percentile_interval(&mut overall),
        per_category: if by_category {
            interval_map(cat_names, cat_rates)
        } else {
            BTreeMap::new()
        },
        per_attribute: by_attribute.then(|| interval_map(attr_names, attr_rates)),
    })
}

fn percentile_interval(values: &mut [f64]) -> (f64, f64) {
    values.sort_by(f64::total_cmp);
    (percentile(values, 2.5), percentile(values, 97.5))
}

/// Linear interpolation between closest ranks over sorted values.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}
