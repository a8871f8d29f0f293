//! Reference oracles and synthetic fixtures for testing `nnd-core`.
//!
//! Everything here is deliberately naive and shares no code path with the
//! library: pairs are enumerated over all n² ordered index pairs, tau counts
//! concordant and discordant pairs directly, Pearson uses the two-pass
//! definition, and pass rates come from planted labels rather than from
//! likelihoods.

use std::collections::{BTreeMap, BTreeSet};

use nnd_core::{
    AnnotationRecord, Candidate, Comparability, NndTest, QualityMapping, ScoredCandidate, Side,
};
use rand::seq::SliceRandom;
use rand::Rng;

// ---------------------------------------------------------------------------
// Pair generation
// ---------------------------------------------------------------------------

/// A quality mapping described in plain tables.
#[derive(Debug, Clone)]
pub struct SyntheticMapping {
    pub tier: BTreeMap<String, i64>,
    pub category: BTreeMap<String, String>,
    /// `None` means every pair is comparable; otherwise both orientations are stored.
    pub comparable: Option<BTreeSet<(String, String)>>,
}

impl SyntheticMapping {
    /// 2 or 3 tiers with one or two labels each and random comparability.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let n_tiers = rng.gen_range(2..=3);
        let mut tier = BTreeMap::new();
        let mut category = BTreeMap::new();
        for t in 0..n_tiers {
            for k in 0..rng.gen_range(1..=2) {
                let label = format!("T{t}L{k}");
                if t < n_tiers - 1 {
                    category.insert(label.clone(), format!("cat-{label}"));
                }
                tier.insert(label, t as i64);
            }
        }
        let comparable = if rng.gen_bool(0.3) {
            None
        } else {
            let labels: Vec<&String> = tier.keys().collect();
            let mut set = BTreeSet::new();
            for (i, a) in labels.iter().enumerate() {
                for b in &labels[i + 1..] {
                    if rng.gen_bool(0.6) {
                        set.insert(((*a).clone(), (*b).clone()));
                        set.insert(((*b).clone(), (*a).clone()));
                    }
                }
            }
            Some(set)
        };
        SyntheticMapping {
            tier,
            category,
            comparable,
        }
    }

    pub fn labels(&self) -> Vec<&str> {
        self.tier.keys().map(String::as_str).collect()
    }

    pub fn is_comparable(&self, a: &str, b: &str) -> bool {
        match &self.comparable {
            None => true,
            Some(set) => set.contains(&(a.to_string(), b.to_string())),
        }
    }

    pub fn to_mapping(&self) -> QualityMapping {
        let comparability = match &self.comparable {
            None => Comparability::All,
            Some(set) => Comparability::pairs(set.iter().cloned()),
        };
        QualityMapping::new(
            self.tier.clone(),
            self.category.clone(),
            comparability,
            None,
        )
        .expect("synthetic mapping is valid")
    }
}

const TEXT_POOL: [&str; 6] = [
    "what is the capital",
    "who wrote it",
    "why is the sky blue",
    "how many coins",
    "what do enzymes do",
    "where is it",
];

/// Random text from a small pool with random casing and spacing, so that
/// duplicates after normalization are common.
pub fn noisy_text<R: Rng>(rng: &mut R) -> String {
    let base = TEXT_POOL.choose(rng).expect("pool is non-empty");
    let mut out = String::new();
    for (i, word) in base.split(' ').enumerate() {
        if i > 0 {
            out.push_str(if rng.gen_bool(0.2) { "   " } else { " " });
        }
        if rng.gen_bool(0.3) {
            out.push_str(&word.to_uppercase());
        } else {
            out.push_str(word);
        }
    }
    if rng.gen_bool(0.2) {
        out.push('\t');
    }
    out
}

/// One context with up to `max_size` labelled candidates.
pub fn random_group<R: Rng>(
    rng: &mut R,
    context_id: &str,
    mapping: &SyntheticMapping,
    max_size: usize,
) -> Vec<AnnotationRecord> {
    let labels = mapping.labels();
    let n = rng.gen_range(1..=max_size);
    (0..n)
        .map(|i| AnnotationRecord {
            context_id: context_id.to_string(),
            context_text: format!("context {context_id}"),
            candidate_id: format!("{context_id}-c{i}"),
            candidate_text: noisy_text(rng),
            model_id: format!("model-{}", rng.gen_range(0..3)),
            label: Some(labels.choose(rng).expect("labels").to_string()),
            raw_scores: None,
            attribute: None,
        })
        .collect()
}

/// Oracle duplicate key: whitespace-split words, rejoined, lowercased.
pub fn oracle_key(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// `(context_id, high candidate, low candidate, category)`
pub type PairKey = (String, String, String, String);

/// Every eligible ordered pair, by checking all n² index pairs per context.
pub fn brute_force_pairs(
    records: &[AnnotationRecord],
    mapping: &SyntheticMapping,
) -> BTreeSet<PairKey> {
    let mut out = BTreeSet::new();
    for (i, a) in records.iter().enumerate() {
        for (j, b) in records.iter().enumerate() {
            if i == j || a.context_id != b.context_id {
                continue;
            }
            let la = a.label.as_deref().expect("labelled");
            let lb = b.label.as_deref().expect("labelled");
            if mapping.tier[la] > mapping.tier[lb]
                && mapping.is_comparable(la, lb)
                && oracle_key(&a.candidate_text) != oracle_key(&b.candidate_text)
            {
                out.insert((
                    a.context_id.clone(),
                    a.candidate_id.clone(),
                    b.candidate_id.clone(),
                    mapping.category[lb].clone(),
                ));
            }
        }
    }
    out
}

pub fn suite_pairs(suite: &[NndTest]) -> BTreeSet<PairKey> {
    suite
        .iter()
        .map(|t| {
            (
                t.context_id.clone(),
                t.high_candidate.candidate_id.clone(),
                t.low_candidate.candidate_id.clone(),
                t.error_category.clone(),
            )
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Likelihood and pass rates
// ---------------------------------------------------------------------------

/// Neumaier-compensated sum.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

pub fn compensated_mean(values: &[f64]) -> f64 {
    compensated_sum(values) / values.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Planted {
    Pass,
    Fail,
    Tie,
}

/// A test together with the outcome its planted scores must produce.
#[derive(Debug, Clone)]
pub struct PlantedTest {
    pub test: NndTest,
    pub planted: Planted,
    pub high: ScoredCandidate,
    pub low: ScoredCandidate,
}

/// Token vector whose floating-point mean is exactly `mean` (which must be
/// non-positive): values are small dyadic rationals, so every partial sum is
/// exact.
fn tokens_with_mean<R: Rng>(rng: &mut R, mean: f64) -> Vec<f64> {
    // capped so every token stays a valid (non-positive) log-probability
    let spread = (f64::from(rng.gen_range(0..8u8)) / 8.0).min(-mean);
    match rng.gen_range(0..3) {
        0 => vec![mean],
        1 => vec![mean - spread, mean + spread],
        _ => {
            let mut v = vec![mean + spread, mean - spread, mean];
            v.shuffle(rng);
            v
        }
    }
}

/// `n` tests over `categories` (and optional attributes) with planted
/// log-probabilities. Roughly 45% pass, 45% fail, 10% tie.
pub fn planted_suite<R: Rng>(
    rng: &mut R,
    n: usize,
    model_id: &str,
    categories: &[&str],
    attributes: &[&str],
) -> Vec<PlantedTest> {
    (0..n)
        .map(|i| {
            let test_id = format!("{i:016x}");
            let candidate = |c: &str| Candidate {
                candidate_id: format!("{test_id}-{c}"),
                text: format!("candidate {c} of {i}"),
                model_id: "source".into(),
            };
            let test = NndTest {
                test_id: test_id.clone(),
                context_id: format!("ctx-{}", i / 4),
                context_text: "context".into(),
                high_candidate: candidate("h"),
                low_candidate: candidate("l"),
                error_category: categories[rng.gen_range(0..categories.len())].to_string(),
                attribute: (!attributes.is_empty())
                    .then(|| attributes[rng.gen_range(0..attributes.len())].to_string()),
            };
            let roll = rng.gen_range(0..100);
            let planted = match roll {
                0..=44 => Planted::Pass,
                45..=89 => Planted::Fail,
                _ => Planted::Tie,
            };
            // means on a 1/4 grid in [-8, -0.25]
            let a = -f64::from(rng.gen_range(1..=32u8)) / 4.0;
            let b = loop {
                let b = -f64::from(rng.gen_range(1..=32u8)) / 4.0;
                if b != a {
                    break b;
                }
            };
            let (hi, lo) = match planted {
                Planted::Pass => (a.max(b), a.min(b)),
                Planted::Fail => (a.min(b), a.max(b)),
                Planted::Tie => (a, a),
            };
            let scored = |side: Side, mean: f64, rng: &mut R| {
                let token_logprobs = tokens_with_mean(rng, mean);
                ScoredCandidate {
                    test_id: test_id.clone(),
                    side,
                    model_id: model_id.to_string(),
                    token_count: token_logprobs.len(),
                    token_logprobs,
                    unscorable: None,
                }
            };
            let high = scored(Side::High, hi, rng);
            let low = scored(Side::Low, lo, rng);
            PlantedTest {
                test,
                planted,
                high,
                low,
            }
        })
        .collect()
}

/// `(passed, total)` overall and per category, counted from planted labels.
pub fn count_planted(tests: &[PlantedTest]) -> ((usize, usize), BTreeMap<String, (usize, usize)>) {
    let mut overall = (0, 0);
    let mut per = BTreeMap::new();
    for t in tests {
        let pass = usize::from(t.planted == Planted::Pass);
        overall.0 += pass;
        overall.1 += 1;
        let e: &mut (usize, usize) = per.entry(t.test.error_category.clone()).or_default();
        e.0 += pass;
        e.1 += 1;
    }
    (overall, per)
}

// ---------------------------------------------------------------------------
// Correlations
// ---------------------------------------------------------------------------

/// Kendall tau-b from direct concordant/discordant/tie counts over all pairs.
/// `None` when either vector is constant.
pub fn pair_count_tau(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    let (mut concordant, mut discordant, mut tie_x, mut tie_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tie_x += 1;
            } else if dy == 0.0 {
                tie_y += 1;
            } else if (dx > 0.0) == (dy > 0.0) {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let denom =
        (((concordant + discordant + tie_x) * (concordant + discordant + tie_y)) as f64).sqrt();
    if denom == 0.0 {
        None
    } else {
        Some((concordant - discordant) as f64 / denom)
    }
}

/// Pearson r from the two-pass definition. `None` for zero variance.
pub fn two_pass_pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

/// Random vector of length `n` drawn from a small integer range so that ties
/// are frequent.
pub fn tied_vector<R: Rng>(rng: &mut R, n: usize, levels: i32) -> Vec<f64> {
    (0..n)
        .map(|_| f64::from(rng.gen_range(0..levels)))
        .collect()
}
