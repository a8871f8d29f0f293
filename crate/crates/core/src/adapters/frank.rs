//! FRANK factual-consistency annotations.
//!
//! Expected layout, one JSON object per (article, system summary):
//!
//! ```json
//! {"hash": "3c1f...", "model_name": "bart", "article": "...", "summary": "...",
//!  "split": "test", "label": "EntE"}
//! ```
//!
//! `label` is either a fine-grained error code or its group name. Codes
//! collapse into the error hierarchy:
//!
//! | group          | codes                       |
//! |----------------|-----------------------------|
//! | No Error       | `NoE`                       |
//! | Semantic Frame | `PredE`/`RelE`, `EntE`, `CircE` |
//! | Discourse      | `CorefE`, `LinkE`           |
//! | Verifiability  | `OutE`, `GramE`             |
//! | Other (dropped)| `OtherE`                    |

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{require_non_empty, row_error, Adapted};
use crate::error::Result;
use crate::model::AnnotationRecord;
use crate::quality::QualityMapping;

const SOURCE: &str = "frank";
pub const NO_ERROR: &str = "No Error";
pub const GROUPS: [&str; 3] = ["Semantic Frame", "Discourse", "Verifiability"];

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct FrankRow {
    pub hash: String,
    pub model_name: String,
    pub article: String,
    pub summary: String,
    #[serde(default)]
    pub split: Option<String>,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrankOptions {
    /// Rows whose `split` differs are skipped; rows without a split are kept.
    pub split: Option<String>,
}

impl Default for FrankOptions {
    fn default() -> Self {
        FrankOptions {
            split: Some("test".into()),
        }
    }
}

enum Group {
    Keep(&'static str),
    Other,
}

fn group_of(label: &str) -> Option<Group> {
    let g = match label {
        "No Error" | "NoE" => Group::Keep(NO_ERROR),
        "Semantic Frame" | "PredE" | "RelE" | "EntE" | "CircE" => Group::Keep(GROUPS[0]),
        "Discourse" | "CorefE" | "LinkE" => Group::Keep(GROUPS[1]),
        "Verifiability" | "Content Verifiability" | "OutE" | "GramE" => Group::Keep(GROUPS[2]),
        "Other" | "OtherE" => Group::Other,
        _ => return None,
    };
    Some(g)
}

pub fn frank_mapping() -> QualityMapping {
    QualityMapping::two_tier([NO_ERROR], GROUPS).expect("static mapping")
}

pub fn adapt_frank(rows: &[(usize, FrankRow)], options: &FrankOptions) -> Result<Adapted> {
    let mut records = Vec::with_capacity(rows.len());
    let mut dropped = 0;
    for (line, row) in rows {
        let line = *line;
        let group = group_of(&row.label)
            .ok_or_else(|| row_error(SOURCE, line, format!("unknown label '{}'", row.label)))?;
        if let (Some(want), Some(have)) = (&options.split, &row.split) {
            if want != have {
                dropped += 1;
                continue;
            }
        }
        let Group::Keep(group) = group else {
            dropped += 1;
            continue;
        };
        require_non_empty(SOURCE, line, "hash", &row.hash)?;
        require_non_empty(SOURCE, line, "model_name", &row.model_name)?;
        records.push(AnnotationRecord {
            context_id: row.hash.clone(),
            context_text: row.article.clone(),
            candidate_id: row.model_name.clone(),
            candidate_text: row.summary.clone(),
            model_id: row.model_name.clone(),
            label: Some(group.to_string()),
            raw_scores: None,
            attribute: None,
        });
    }
    let mut metadata = Map::new();
    metadata.insert(
        "split".into(),
        options
            .split
            .clone()
            .map(Value::String)
            .unwrap_or(Value::Null),
    );
    Ok(Adapted {
        records,
        mapping: frank_mapping(),
        metadata,
        dropped,
    })
}
