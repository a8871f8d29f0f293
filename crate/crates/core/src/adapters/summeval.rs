//! SummEval Likert annotations (the aligned, document-paired JSONL release).
//!
//! Expected layout, one JSON object per (document, system summary):
//!
//! ```json
//! {"id": "dm-test-8764fb95...", "text": "<document>", "decoded": "<summary>", "model_id": "M11",
//!  "expert_annotations": [{"coherence": 2, "consistency": 5, "fluency": 4, "relevance": 3}, ...],
//!  "turker_annotations": [...]}
//! ```
//!
//! Each attribute is judged on its own: a summary is high quality for an
//! attribute when strictly more than half of the annotators rated it 5.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{require_non_empty, row_error, Adapted};
use crate::error::Result;
use crate::model::AnnotationRecord;
use crate::quality::{Comparability, LabelRule, QualityMapping};

const SOURCE: &str = "summeval";
pub const HIGH_QUALITY: &str = "High Quality";
pub const ATTRIBUTES: [&str; 4] = ["Coherence", "Consistency", "Fluency", "Relevance"];

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
pub struct LikertRatings {
    pub coherence: f64,
    pub consistency: f64,
    pub fluency: f64,
    pub relevance: f64,
}

impl LikertRatings {
    fn get(&self, attribute: &str) -> f64 {
        match attribute {
            "Coherence" => self.coherence,
            "Consistency" => self.consistency,
            "Fluency" => self.fluency,
            "Relevance" => self.relevance,
            _ => unreachable!("attribute list is fixed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SummEvalRow {
    pub id: String,
    pub text: String,
    pub decoded: String,
    pub model_id: String,
    pub expert_annotations: Vec<LikertRatings>,
    #[serde(default)]
    pub turker_annotations: Vec<LikertRatings>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Annotators {
    #[default]
    Expert,
    Turker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SummEvalOptions {
    pub annotators: Annotators,
}

fn low_label(attribute: &str) -> String {
    format!("Low {attribute}")
}

fn summeval_mapping() -> QualityMapping {
    let mut tiers = BTreeMap::from([(HIGH_QUALITY.to_string(), 1)]);
    let mut categories = BTreeMap::new();
    for a in ATTRIBUTES {
        tiers.insert(low_label(a), 0);
        categories.insert(low_label(a), a.to_string());
    }
    QualityMapping::new(tiers, categories, Comparability::All, None).expect("static mapping")
}

/// Produces one record stream per attribute (records tagged with it).
pub fn adapt_summeval(rows: &[(usize, SummEvalRow)], options: SummEvalOptions) -> Result<Adapted> {
    let mut records = Vec::with_capacity(rows.len() * ATTRIBUTES.len());
    for (line, row) in rows {
        let line = *line;
        require_non_empty(SOURCE, line, "id", &row.id)?;
        require_non_empty(SOURCE, line, "model_id", &row.model_id)?;
        let ratings = match options.annotators {
            Annotators::Expert => &row.expert_annotations,
            Annotators::Turker => &row.turker_annotations,
        };
        if ratings.is_empty() {
            return Err(row_error(
                SOURCE,
                line,
                "no annotations for the selected annotators",
            ));
        }
        for attribute in ATTRIBUTES {
            let scores: Vec<f64> = ratings.iter().map(|r| r.get(attribute)).collect();
            if let Some(bad) = scores.iter().find(|s| !(1.0..=5.0).contains(*s)) {
                return Err(row_error(
                    SOURCE,
                    line,
                    format!("{attribute} rating {bad} is outside 1-5"),
                ));
            }
            let rule = LabelRule::Majority {
                at_least: 5.0,
                high_label: HIGH_QUALITY.to_string(),
                low_label: low_label(attribute),
            };
            let label = rule
                .derive(&scores)
                .map_err(|reason| row_error(SOURCE, line, reason))?;
            records.push(AnnotationRecord {
                context_id: row.id.clone(),
                context_text: row.text.clone(),
                candidate_id: row.model_id.clone(),
                candidate_text: row.decoded.clone(),
                model_id: row.model_id.clone(),
                label: Some(label),
                raw_scores: Some(scores),
                attribute: Some(attribute.to_string()),
            });
        }
    }
    let mut metadata = Map::new();
    metadata.insert(
        "annotators".into(),
        serde_json::to_value(options.annotators).unwrap_or(Value::Null),
    );
    Ok(Adapted {
        records,
        mapping: summeval_mapping(),
        metadata,
        dropped: 0,
    })
}
