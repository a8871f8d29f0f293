//! Quality mappings: label taxonomy, tiers, error categories and the
//! comparability relation that makes the quality order partial.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{NndError, Result};
use crate::model::AnnotationRecord;

/// Which label pairs have a known quality differential.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Comparability {
    All,
    /// Unordered label pairs, stored with the lexicographically smaller label first.
    Pairs(BTreeSet<(String, String)>),
}

impl Comparability {
    pub fn pairs<I, A, B>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        Comparability::Pairs(
            pairs
                .into_iter()
                .map(|(a, b)| ordered(a.into(), b.into()))
                .collect(),
        )
    }

    pub fn allows(&self, a: &str, b: &str) -> bool {
        match self {
            Comparability::All => true,
            Comparability::Pairs(set) => {
                let key = if a <= b { (a, b) } else { (b, a) };
                set.iter().any(|(x, y)| x == key.0 && y == key.1)
            }
        }
    }
}

fn ordered(a: String, b: String) -> (String, String) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Derives a label from `raw_scores` for score-based annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabelRule {
    /// `high_label` when strictly more than half of the scores are at least
    /// `at_least`, otherwise `low_label`.
    Majority {
        at_least: f64,
        high_label: String,
        low_label: String,
    },
    /// A single score mapped through an exact value table.
    Exact { values: Vec<ScoreLabel> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreLabel {
    pub score: f64,
    pub label: String,
}

impl LabelRule {
    pub fn derive(&self, scores: &[f64]) -> std::result::Result<String, String> {
        if scores.is_empty() {
            return Err("no scores".into());
        }
        if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
            return Err(format!("non-finite score {bad}"));
        }
        match self {
            LabelRule::Majority {
                at_least,
                high_label,
                low_label,
            } => {
                let hits = scores.iter().filter(|&&s| s >= *at_least).count();
                if 2 * hits > scores.len() {
                    Ok(high_label.clone())
                } else {
                    Ok(low_label.clone())
                }
            }
            LabelRule::Exact { values } => {
                let [score] = scores else {
                    return Err(format!("expected exactly one score, got {}", scores.len()));
                };
                values
                    .iter()
                    .find(|v| v.score == *score)
                    .map(|v| v.label.clone())
                    .ok_or_else(|| format!("score {score} has no label"))
            }
        }
    }

    fn labels(&self) -> Vec<&str> {
        match self {
            LabelRule::Majority {
                high_label,
                low_label,
                ..
            } => vec![high_label, low_label],
            LabelRule::Exact { values } => values.iter().map(|v| v.label.as_str()).collect(),
        }
    }
}

/// Tier and error category assigned to one record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quality {
    pub tier: i64,
    pub category: Option<String>,
}

/// Validated mapping from annotation labels to quality tiers.
///
/// Serializes to the mapping-config JSON document:
/// `{taxonomy, tiers, categories, comparability: "all" | [[a, b], ...], label_rule?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MappingConfig", into = "MappingConfig")]
pub struct QualityMapping {
    tiers: BTreeMap<String, i64>,
    categories: BTreeMap<String, String>,
    comparability: Comparability,
    label_rule: Option<LabelRule>,
    max_tier: i64,
}

impl QualityMapping {
    pub fn new(
        tiers: BTreeMap<String, i64>,
        categories: BTreeMap<String, String>,
        comparability: Comparability,
        label_rule: Option<LabelRule>,
    ) -> Result<Self> {
        let max_tier = *tiers
            .values()
            .max()
            .ok_or_else(|| NndError::InvalidMapping("empty taxonomy".into()))?;
        if let Some(label) = tiers.keys().find(|l| l.is_empty()) {
            return Err(NndError::InvalidMapping(format!("empty label {label:?}")));
        }
        for (label, tier) in &tiers {
            if *tier < max_tier && categories.get(label).is_none_or(|c| c.trim().is_empty()) {
                return Err(NndError::InvalidMapping(format!(
                    "label '{label}' is below the top tier but has no error category"
                )));
            }
        }
        for (label, category) in &categories {
            if !tiers.contains_key(label) {
                return Err(NndError::InvalidMapping(format!(
                    "category given for unknown label '{label}'"
                )));
            }
            if category.trim().is_empty() {
                return Err(NndError::InvalidMapping(format!(
                    "label '{label}' has an empty category"
                )));
            }
        }
        if let Comparability::Pairs(pairs) = &comparability {
            for (a, b) in pairs {
                for l in [a, b] {
                    if !tiers.contains_key(l) {
                        return Err(NndError::InvalidMapping(format!(
                            "comparability references unknown label '{l}'"
                        )));
                    }
                }
            }
        }
        if let Some(rule) = &label_rule {
            for l in rule.labels() {
                if !tiers.contains_key(l) {
                    return Err(NndError::InvalidMapping(format!(
                        "label rule produces unknown label '{l}'"
                    )));
                }
            }
        }
        Ok(QualityMapping {
            tiers,
            categories,
            comparability,
            label_rule,
            max_tier,
        })
    }

    /// Two tiers: `high` labels at tier 1, each low label at tier 0 with
    /// itself as error category, all labels mutually comparable.
    pub fn two_tier<'a>(
        high: impl IntoIterator<Item = &'a str>,
        low: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self> {
        let mut tiers = BTreeMap::new();
        let mut categories = BTreeMap::new();
        for l in high {
            tiers.insert(l.to_string(), 1);
        }
        for l in low {
            tiers.insert(l.to_string(), 0);
            categories.insert(l.to_string(), l.to_string());
        }
        QualityMapping::new(tiers, categories, Comparability::All, None)
    }

    pub fn with_label_rule(mut self, rule: LabelRule) -> Result<Self> {
        self.label_rule = Some(rule);
        let QualityMapping {
            tiers,
            categories,
            comparability,
            label_rule,
            ..
        } = self;
        QualityMapping::new(tiers, categories, comparability, label_rule)
    }

    pub fn taxonomy(&self) -> impl Iterator<Item = &str> {
        self.tiers.keys().map(String::as_str)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.tiers.contains_key(label)
    }

    pub fn tier_of(&self, label: &str) -> Option<i64> {
        self.tiers.get(label).copied()
    }

    pub fn category_of(&self, label: &str) -> Option<&str> {
        self.categories.get(label).map(String::as_str)
    }

    pub fn max_tier(&self) -> i64 {
        self.max_tier
    }

    pub fn comparable(&self, a: &str, b: &str) -> bool {
        self.comparability.allows(a, b)
    }

    pub fn comparability(&self) -> &Comparability {
        &self.comparability
    }

    pub fn label_rule(&self) -> Option<&LabelRule> {
        self.label_rule.as_ref()
    }

    /// The record's explicit label, or the one derived from its raw scores.
    pub fn resolve_label(&self, record: &AnnotationRecord) -> Result<String> {
        let label = match (&record.label, &record.raw_scores) {
            (Some(label), _) => label.clone(),
            (None, Some(scores)) => {
                let rule = self
                    .label_rule
                    .as_ref()
                    .ok_or_else(|| NndError::NoDerivationRule {
                        candidate_id: record.candidate_id.clone(),
                    })?;
                rule.derive(scores).map_err(|reason| NndError::LabelRule {
                    candidate_id: record.candidate_id.clone(),
                    reason,
                })?
            }
            (None, None) => {
                return Err(NndError::MissingLabel {
                    candidate_id: record.candidate_id.clone(),
                })
            }
        };
        if !self.contains(&label) {
            return Err(NndError::UnknownLabel { label });
        }
        Ok(label)
    }
}

/// Assigns a quality tier, plus an error category for anything below the top tier.
pub fn assign_quality(record: &AnnotationRecord, mapping: &QualityMapping) -> Result<Quality> {
    let label = mapping.resolve_label(record)?;
    quality_of_label(&label, mapping)
}

pub(crate) fn quality_of_label(label: &str, mapping: &QualityMapping) -> Result<Quality> {
    let tier = mapping
        .tier_of(label)
        .ok_or_else(|| NndError::UnknownLabel {
            label: label.to_string(),
        })?;
    let category = if tier < mapping.max_tier() {
        mapping.category_of(label).map(str::to_string)
    } else {
        None
    };
    Ok(Quality { tier, category })
}

/// Wire form of [`QualityMapping`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingConfig {
    pub taxonomy: Vec<String>,
    pub tiers: BTreeMap<String, i64>,
    #[serde(default)]
    pub categories: BTreeMap<String, String>,
    pub comparability: ComparabilitySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_rule: Option<LabelRule>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComparabilitySpec {
    Keyword(String),
    Pairs(Vec<(String, String)>),
}

impl TryFrom<MappingConfig> for QualityMapping {
    type Error = NndError;

    fn try_from(cfg: MappingConfig) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for label in &cfg.taxonomy {
            if !seen.insert(label.as_str()) {
                return Err(NndError::InvalidMapping(format!(
                    "label '{label}' listed twice in taxonomy"
                )));
            }
        }
        let tier_labels: BTreeSet<&str> = cfg.tiers.keys().map(String::as_str).collect();
        if seen != tier_labels {
            let missing: Vec<_> = seen.difference(&tier_labels).collect();
            let extra: Vec<_> = tier_labels.difference(&seen).collect();
            return Err(NndError::InvalidMapping(format!(
                "every taxonomy label needs exactly one tier (no tier: {missing:?}, not in taxonomy: {extra:?})"
            )));
        }
        let comparability = match cfg.comparability {
            ComparabilitySpec::Keyword(k) if k == "all" => Comparability::All,
            ComparabilitySpec::Keyword(k) => {
                return Err(NndError::InvalidMapping(format!(
                    "comparability must be \"all\" or a list of label pairs, got \"{k}\""
                )))
            }
            ComparabilitySpec::Pairs(pairs) => Comparability::pairs(pairs),
        };
        QualityMapping::new(cfg.tiers, cfg.categories, comparability, cfg.label_rule)
    }
}

impl From<QualityMapping> for MappingConfig {
    fn from(m: QualityMapping) -> Self {
        // taxonomy listed from best to worst tier, then by name
        let mut taxonomy: Vec<String> = m.tiers.keys().cloned().collect();
        taxonomy.sort_by(|a, b| m.tiers[b].cmp(&m.tiers[a]).then_with(|| a.cmp(b)));
        let comparability = match m.comparability {
            Comparability::All => ComparabilitySpec::Keyword("all".into()),
            Comparability::Pairs(pairs) => ComparabilitySpec::Pairs(pairs.into_iter().collect()),
        };
        MappingConfig {
            taxonomy,
            tiers: m.tiers,
            categories: m.categories,
            comparability,
            label_rule: m.label_rule,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(label: Option<&str>, scores: Option<Vec<f64>>) -> AnnotationRecord {
        AnnotationRecord {
            context_id: "c".into(),
            context_text: "ctx".into(),
            candidate_id: "q1".into(),
            candidate_text: "text".into(),
            model_id: "m".into(),
            label: label.map(str::to_string),
            raw_scores: scores,
            attribute: None,
        }
    }

    fn quiz() -> QualityMapping {
        QualityMapping::two_tier(["No Error"], ["Disfluent", "Off Target", "Wrong Context"])
            .unwrap()
    }

    #[test]
    fn no_error_is_top_tier_without_category() {
        let q = assign_quality(&record(Some("No Error"), None), &quiz()).unwrap();
        assert_eq!(
            q,
            Quality {
                tier: 1,
                category: None
            }
        );
    }

    #[test]
    fn disfluent_is_low_tier_with_own_category() {
        let q = assign_quality(&record(Some("Disfluent"), None), &quiz()).unwrap();
        assert_eq!(
            q,
            Quality {
                tier: 0,
                category: Some("Disfluent".into())
            }
        );
    }

    #[test]
    fn unknown_label_is_an_error() {
        let err = assign_quality(&record(Some("Not Fluent"), None), &quiz()).unwrap_err();
        assert!(matches!(err, NndError::UnknownLabel { .. }));
    }

    #[test]
    fn raw_scores_without_rule_is_an_error() {
        let err = assign_quality(&record(None, Some(vec![5.0])), &quiz()).unwrap_err();
        assert!(matches!(err, NndError::NoDerivationRule { .. }));
        let err = assign_quality(&record(None, None), &quiz()).unwrap_err();
        assert!(matches!(err, NndError::MissingLabel { .. }));
    }

    #[test]
    fn majority_rule_requires_strictly_more_than_half() {
        let rule = LabelRule::Majority {
            at_least: 5.0,
            high_label: "hi".into(),
            low_label: "lo".into(),
        };
        assert_eq!(rule.derive(&[5.0, 5.0, 5.0]).unwrap(), "hi");
        assert_eq!(rule.derive(&[5.0, 5.0, 4.0]).unwrap(), "hi");
        assert_eq!(rule.derive(&[5.0, 4.0, 4.0]).unwrap(), "lo");
        assert_eq!(rule.derive(&[5.0, 5.0, 4.0, 3.0]).unwrap(), "lo");
        assert!(rule.derive(&[]).is_err());
    }

    #[test]
    fn exact_rule_maps_single_score() {
        let rule = LabelRule::Exact {
            values: vec![
                ScoreLabel {
                    score: 1.0,
                    label: "ok".into(),
                },
                ScoreLabel {
                    score: 0.0,
                    label: "bad".into(),
                },
            ],
        };
        assert_eq!(rule.derive(&[1.0]).unwrap(), "ok");
        assert!(rule.derive(&[0.5]).is_err());
        assert!(rule.derive(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn mapping_rejects_low_label_without_category() {
        let tiers = BTreeMap::from([("a".to_string(), 1), ("b".to_string(), 0)]);
        let err = QualityMapping::new(tiers, BTreeMap::new(), Comparability::All, None);
        assert!(matches!(err, Err(NndError::InvalidMapping(_))));
    }

    #[test]
    fn comparability_is_symmetric() {
        let c = Comparability::pairs([("b", "a")]);
        assert!(c.allows("a", "b"));
        assert!(c.allows("b", "a"));
        assert!(!c.allows("a", "c"));
    }

    #[test]
    fn mapping_config_round_trip() {
        let json = r#"{
            "taxonomy": ["good", "meh", "bad"],
            "tiers": {"good": 2, "meh": 1, "bad": 0},
            "categories": {"meh": "Meh", "bad": "Bad"},
            "comparability": [["good", "bad"], ["good", "meh"]]
        }"#;
        let m: QualityMapping = serde_json::from_str(json).unwrap();
        assert!(!m.comparable("meh", "bad"));
        assert_eq!(m.max_tier(), 2);
        let back: QualityMapping =
            serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn mapping_config_requires_one_tier_per_label() {
        let json = r#"{"taxonomy": ["a", "b"], "tiers": {"a": 1},
                       "categories": {}, "comparability": "all"}"#;
        assert!(serde_json::from_str::<QualityMapping>(json).is_err());
        let json = r#"{"taxonomy": ["a"], "tiers": {"a": 1}, "comparability": "some"}"#;
        assert!(serde_json::from_str::<QualityMapping>(json).is_err());
    }
}
