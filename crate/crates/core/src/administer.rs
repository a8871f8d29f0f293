//! Scoring tests from token log-probabilities.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use crate::error::{NndError, Result};
use crate::model::{NndTest, ScoredCandidate, Side, TestOutcome};

/// Length-normalized log-likelihood: mean of the token log-probabilities.
pub fn sequence_log_likelihood(scored: &ScoredCandidate) -> Result<f64> {
    check_scored(scored)?;
    let total: f64 = scored.token_logprobs.iter().sum();
    Ok(total / scored.token_count as f64)
}

fn check_scored(s: &ScoredCandidate) -> Result<()> {
    let malformed = |reason: String| NndError::MalformedScore {
        test_id: s.test_id.clone(),
        side: s.side,
        reason,
    };
    if let Some(reason) = &s.unscorable {
        return Err(malformed(format!("marked unscorable: {reason}")));
    }
    if s.token_count == 0 || s.token_logprobs.is_empty() {
        return Err(NndError::EmptyTokens {
            test_id: s.test_id.clone(),
            side: s.side,
        });
    }
    if s.token_count != s.token_logprobs.len() {
        return Err(malformed(format!(
            "token_count {} but {} log-probabilities",
            s.token_count,
            s.token_logprobs.len()
        )));
    }
    if let Some(i) = s.token_logprobs.iter().position(|v| !v.is_finite()) {
        return Err(malformed(format!(
            "non-finite log-probability at token {i}"
        )));
    }
    Ok(())
}

/// Runs one test. Passes only when the high candidate is strictly more
/// likely; ties fail.
pub fn administer_test(
    test: &NndTest,
    high: &ScoredCandidate,
    low: &ScoredCandidate,
) -> Result<TestOutcome> {
    let mismatch = |reason: String| NndError::ScoreMismatch {
        test_id: test.test_id.clone(),
        reason,
    };
    for (score, side) in [(high, Side::High), (low, Side::Low)] {
        if score.test_id != test.test_id {
            return Err(mismatch(format!(
                "{side} score carries test id '{}'",
                score.test_id
            )));
        }
        if score.side != side {
            return Err(mismatch(format!(
                "expected {side} side, got {}",
                score.side
            )));
        }
    }
    if high.model_id != low.model_id {
        return Err(mismatch(format!(
            "high scored by '{}', low by '{}'",
            high.model_id, low.model_id
        )));
    }
    let ll_high = sequence_log_likelihood(high)?;
    let ll_low = sequence_log_likelihood(low)?;
    Ok(TestOutcome {
        test_id: test.test_id.clone(),
        model_id: high.model_id.clone(),
        ll_high,
        ll_low,
        passed: ll_high > ll_low,
        error_category: test.error_category.clone(),
        attribute: test.attribute.clone(),
    })
}

type ScoreKey = (String, String, Side);

/// Scores keyed by `(model_id, test_id, side)`.
///
/// Byte-identical repeats are collapsed; differing repeats are rejected.
/// Lines marked unscorable are kept out of the index and count as missing.
#[derive(Debug, Default, Clone)]
pub struct ScoreIndex {
    scores: HashMap<ScoreKey, ScoredCandidate>,
    models: BTreeSet<String>,
}

impl ScoreIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_scores<I: IntoIterator<Item = ScoredCandidate>>(scores: I) -> Result<Self> {
        let mut index = ScoreIndex::new();
        for s in scores {
            index.insert(s)?;
        }
        Ok(index)
    }

    pub fn insert(&mut self, s: ScoredCandidate) -> Result<()> {
        self.models.insert(s.model_id.clone());
        if s.unscorable.is_some() {
            return Ok(());
        }
        let key = (s.model_id.clone(), s.test_id.clone(), s.side);
        match self.scores.get(&key) {
            Some(existing) if *existing == s => Ok(()),
            Some(_) => Err(NndError::ConflictingScores {
                test_id: s.test_id,
                side: s.side,
                model_id: s.model_id,
            }),
            None => {
                self.scores.insert(key, s);
                Ok(())
            }
        }
    }

    /// Every model seen, including ones whose lines were all unscorable.
    pub fn models(&self) -> impl Iterator<Item = &str> {
        self.models.iter().map(String::as_str)
    }

    pub fn get(&self, model_id: &str, test_id: &str, side: Side) -> Option<&ScoredCandidate> {
        self.scores
            .get(&(model_id.to_string(), test_id.to_string(), side))
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Outcomes for one model over a suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Administration {
    pub model_id: String,
    /// In suite order.
    pub outcomes: Vec<TestOutcome>,
    /// Tests missing a score on either side, in suite order.
    pub unscored: Vec<String>,
}

/// Administers every test of the suite for `model_id`, in parallel. The
/// result does not depend on the degree of parallelism.
pub fn administer_suite(
    suite: &[NndTest],
    scores: &ScoreIndex,
    model_id: &str,
) -> Result<Administration> {
    let results: Vec<Result<Option<TestOutcome>>> = suite
        .par_iter()
        .map(|test| {
            let high = scores.get(model_id, &test.test_id, Side::High);
            let low = scores.get(model_id, &test.test_id, Side::Low);
            match (high, low) {
                (Some(h), Some(l)) => administer_test(test, h, l).map(Some),
                _ => Ok(None),
            }
        })
        .collect();

    let mut outcomes = Vec::with_capacity(suite.len());
    let mut unscored = Vec::new();
    for (test, result) in suite.iter().zip(results) {
        match result? {
            Some(outcome) => outcomes.push(outcome),
            None => unscored.push(test.test_id.clone()),
        }
    }
    Ok(Administration {
        model_id: model_id.to_string(),
        outcomes,
        unscored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Candidate;

    pub(crate) fn scored(test_id: &str, side: Side, model: &str, lp: &[f64]) -> ScoredCandidate {
        ScoredCandidate {
            test_id: test_id.into(),
            side,
            model_id: model.into(),
            token_logprobs: lp.to_vec(),
            token_count: lp.len(),
            unscorable: None,
        }
    }

    fn test(id: &str) -> NndTest {
        let cand = |c: &str| Candidate {
            candidate_id: c.into(),
            text: c.into(),
            model_id: "src".into(),
        };
        NndTest {
            test_id: id.into(),
            context_id: "ctx".into(),
            context_text: "context".into(),
            high_candidate: cand("h"),
            low_candidate: cand("l"),
            error_category: "Disfluent".into(),
            attribute: None,
        }
    }

    #[test]
    fn mean_of_two_tokens() {
        let s = scored("t", Side::High, "m", &[-1.0, -3.0]);
        assert_eq!(sequence_log_likelihood(&s).unwrap(), -2.0);
    }

    #[test]
    fn single_token_is_identity() {
        let s = scored("t", Side::High, "m", &[-0.5]);
        assert_eq!(sequence_log_likelihood(&s).unwrap(), -0.5);
    }

    #[test]
    fn empty_or_inconsistent_scores_are_rejected() {
        let s = scored("t", Side::High, "m", &[]);
        assert!(matches!(
            sequence_log_likelihood(&s),
            Err(NndError::EmptyTokens { .. })
        ));
        let mut s = scored("t", Side::High, "m", &[-1.0]);
        s.token_count = 2;
        assert!(sequence_log_likelihood(&s).is_err());
        let s = scored("t", Side::High, "m", &[-1.0, f64::NAN]);
        assert!(sequence_log_likelihood(&s).is_err());
    }

    #[test]
    fn higher_likelihood_passes() {
        let t = test("t");
        let o = administer_test(
            &t,
            &scored("t", Side::High, "m", &[-1.2]),
            &scored("t", Side::Low, "m", &[-1.5]),
        )
        .unwrap();
        assert!(o.passed);
        assert_eq!((o.ll_high, o.ll_low), (-1.2, -1.5));
        assert_eq!(o.error_category, "Disfluent");
    }

    #[test]
    fn tie_fails() {
        let t = test("t");
        let o = administer_test(
            &t,
            &scored("t", Side::High, "m", &[-1.0, -2.0]),
            &scored("t", Side::Low, "m", &[-1.5]),
        )
        .unwrap();
        assert_eq!(o.ll_high, o.ll_low);
        assert!(!o.passed);
    }

    #[test]
    fn mismatched_scores_are_rejected() {
        let t = test("t");
        let h = scored("t", Side::High, "m", &[-1.0]);
        let l = scored("t", Side::Low, "m", &[-2.0]);
        assert!(administer_test(&t, &l, &h).is_err());
        assert!(administer_test(&t, &scored("u", Side::High, "m", &[-1.0]), &l).is_err());
        assert!(administer_test(&t, &h, &scored("t", Side::Low, "other", &[-2.0])).is_err());
    }

    #[test]
    fn missing_side_is_unscored() {
        let suite = vec![test("a"), test("b")];
        let index = ScoreIndex::from_scores([
            scored("a", Side::High, "m", &[-1.0]),
            scored("a", Side::Low, "m", &[-2.0]),
            scored("b", Side::High, "m", &[-1.0]),
        ])
        .unwrap();
        let adm = administer_suite(&suite, &index, "m").unwrap();
        assert_eq!(adm.outcomes.len(), 1);
        assert_eq!(adm.unscored, vec!["b".to_string()]);
    }

    #[test]
    fn index_collapses_identical_and_rejects_conflicting_repeats() {
        let a = scored("a", Side::High, "m", &[-1.0]);
        let mut index = ScoreIndex::from_scores([a.clone(), a.clone()]).unwrap();
        assert_eq!(index.len(), 1);
        let conflict = scored("a", Side::High, "m", &[-1.5]);
        assert!(matches!(
            index.insert(conflict),
            Err(NndError::ConflictingScores { .. })
        ));
    }

    #[test]
    fn unscorable_lines_count_as_missing() {
        let mut s = scored("a", Side::Low, "m", &[]);
        s.token_count = 0;
        s.unscorable = Some("exceeds max_length".into());
        let index = ScoreIndex::from_scores([scored("a", Side::High, "m", &[-1.0]), s]).unwrap();
        let adm = administer_suite(&[test("a")], &index, "m").unwrap();
        assert_eq!(adm.unscored, vec!["a".to_string()]);
        assert_eq!(index.models().collect::<Vec<_>>(), vec!["m"]);
    }
}
