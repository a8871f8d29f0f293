//! Generic schema for datasets without a dedicated adapter.
//!
//! Rows: `{context_id, context_text, candidate_id, candidate_text, model_id,
//! label | raw_scores, attribute?}`. The quality mapping comes from a mapping
//! config document (see [`QualityMapping`]).

use serde::Deserialize;
use serde_json::{Map, Value};

use super::{row_error, Adapted};
use crate::error::{NndError, Result};
use crate::model::AnnotationRecord;
use crate::quality::QualityMapping;

const SOURCE: &str = "generic";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenericRow {
    pub context_id: String,
    pub context_text: String,
    pub candidate_id: String,
    pub candidate_text: String,
    pub model_id: String,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub raw_scores: Option<Vec<f64>>,
    #[serde(default)]
    pub attribute: Option<String>,
}

impl From<GenericRow> for AnnotationRecord {
    fn from(r: GenericRow) -> Self {
        AnnotationRecord {
            context_id: r.context_id,
            context_text: r.context_text,
            candidate_id: r.candidate_id,
            candidate_text: r.candidate_text,
            model_id: r.model_id,
            label: r.label,
            raw_scores: r.raw_scores,
            attribute: r.attribute,
        }
    }
}

/// Checks each row against the mapping (labels are resolved, score-derived
/// labels are materialized) and reports problems with their line numbers.
pub fn adapt_generic(rows: &[(usize, GenericRow)], mapping: &QualityMapping) -> Result<Adapted> {
    let mut records = Vec::with_capacity(rows.len());
    for (line, row) in rows {
        let line = *line;
        for (field, value) in [
            ("context_id", &row.context_id),
            ("candidate_id", &row.candidate_id),
            ("model_id", &row.model_id),
        ] {
            if value.is_empty() {
                return Err(row_error(SOURCE, line, format!("field '{field}' is empty")));
            }
        }
        let mut record = AnnotationRecord::from(row.clone());
        let label = mapping.resolve_label(&record).map_err(|e| match e {
            NndError::UnknownLabel { label } => row_error(
                SOURCE,
                line,
                format!("label '{label}' is not in the taxonomy"),
            ),
            other => row_error(SOURCE, line, other),
        })?;
        record.label = Some(label);
        records.push(record);
    }
    Ok(Adapted {
        records,
        mapping: mapping.clone(),
        metadata: Map::<String, Value>::new(),
        dropped: 0,
    })
}
