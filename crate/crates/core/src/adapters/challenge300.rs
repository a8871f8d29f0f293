//! Challenge 300 generative QA annotations.
//!
//! Expected layout, one JSON object per graded answer:
//!
//! ```json
//! {"id": "c300-042", "question": "How can you sit and stand at the same time?",
//!  "category": "riddle", "model": "macaw-11b", "answer": "you can't", "credit": 1}
//! ```
//!
//! Credit 1 answers are high quality, credit 0 answers are low quality with
//! the question's consolidated category group as error category, and credit
//! 0.5 answers are kept as records but never paired. Tests carry the group
//! as their attribute.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Map;

use super::{require_non_empty, row_error, Adapted};
use crate::error::{NndError, Result};
use crate::model::AnnotationRecord;
use crate::quality::{Comparability, QualityMapping};

const SOURCE: &str = "challenge300";
pub const CORRECT: &str = "Correct";
pub const PARTIAL: &str = "Partially Correct";

const DEFAULT_CATEGORY_MAP: &str = include_str!("../../configs/challenge300_categories.json");

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Challenge300Row {
    #[serde(alias = "question_id")]
    pub id: String,
    pub question: String,
    #[serde(alias = "tag")]
    pub category: String,
    #[serde(alias = "model_name")]
    pub model: String,
    pub answer: String,
    pub credit: f64,
}

/// Source tag to category group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryMap {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub groups: BTreeMap<String, String>,
}

impl CategoryMap {
    pub fn new(groups: BTreeMap<String, String>) -> Result<Self> {
        let map = CategoryMap {
            description: None,
            groups,
        };
        map.validate()?;
        Ok(map)
    }

    /// The shipped 20-tag, 5-group consolidation.
    pub fn challenge300_default() -> Self {
        serde_json::from_str(DEFAULT_CATEGORY_MAP).expect("bundled category map parses")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let map: CategoryMap = serde_json::from_str(text)?;
        map.validate()?;
        Ok(map)
    }

    fn validate(&self) -> Result<()> {
        if self.groups.is_empty() {
            return Err(NndError::InvalidMapping("category map is empty".into()));
        }
        if let Some((tag, _)) = self.groups.iter().find(|(_, g)| g.trim().is_empty()) {
            return Err(NndError::InvalidMapping(format!(
                "tag '{tag}' maps to an empty group"
            )));
        }
        Ok(())
    }

    pub fn group_of(&self, tag: &str) -> Option<&str> {
        self.groups.get(tag).map(String::as_str)
    }

    pub fn group_names(&self) -> BTreeSet<&str> {
        self.groups.values().map(String::as_str).collect()
    }
}

fn challenge300_mapping(groups: &BTreeSet<&str>) -> Result<QualityMapping> {
    let mut tiers = BTreeMap::from([(CORRECT.to_string(), 1), (PARTIAL.to_string(), 0)]);
    let mut categories = BTreeMap::from([(PARTIAL.to_string(), PARTIAL.to_string())]);
    for &g in groups {
        if g == CORRECT || g == PARTIAL {
            return Err(NndError::InvalidMapping(format!(
                "category group '{g}' collides with a credit label"
            )));
        }
        tiers.insert(g.to_string(), 0);
        categories.insert(g.to_string(), g.to_string());
    }
    // partial credit is comparable with nothing, which keeps it out of every pair
    let comparability = Comparability::pairs(groups.iter().map(|&g| (CORRECT, g)));
    QualityMapping::new(tiers, categories, comparability, None)
}

pub fn adapt_challenge300(
    rows: &[(usize, Challenge300Row)],
    category_map: &CategoryMap,
) -> Result<Adapted> {
    category_map.validate()?;
    let mapping = challenge300_mapping(&category_map.group_names())?;
    let mut records = Vec::with_capacity(rows.len());
    for (line, row) in rows {
        let line = *line;
        require_non_empty(SOURCE, line, "id", &row.id)?;
        require_non_empty(SOURCE, line, "model", &row.model)?;
        let group = category_map.group_of(&row.category).ok_or_else(|| {
            row_error(
                SOURCE,
                line,
                format!(
                    "category tag '{}' is missing from the category map",
                    row.category
                ),
            )
        })?;
        let label = if row.credit == 1.0 {
            CORRECT
        } else if row.credit == 0.5 {
            PARTIAL
        } else if row.credit == 0.0 {
            group
        } else {
            return Err(row_error(
                SOURCE,
                line,
                format!("credit {} is not one of 0, 0.5, 1", row.credit),
            ));
        };
        records.push(AnnotationRecord {
            context_id: row.id.clone(),
            context_text: row.question.clone(),
            candidate_id: row.model.clone(),
            candidate_text: row.answer.clone(),
            model_id: row.model.clone(),
            label: Some(label.to_string()),
            raw_scores: Some(vec![row.credit]),
            attribute: Some(group.to_string()),
        });
    }
    let mut metadata = Map::new();
    metadata.insert(
        "category_map".into(),
        serde_json::to_value(category_map).map_err(NndError::from)?,
    );
    Ok(Adapted {
        records,
        mapping,
        metadata,
        dropped: 0,
    })
}
