//! Quiz Design question-generation annotations.
//!
//! Expected layout, one JSON object per annotated question:
//!
//! ```json
//! {"context_id": "qd-17", "context": "...", "answer": "...", "model_name": "mixqg-large",
//!  "question_id": "qd-17-3", "question": "What do enzymes do?", "label": "No Error"}
//! ```
//!
//! `context_id`, `answer` and `question_id` are optional. Without a
//! `context_id` the group key is derived from the context and answer span;
//! without a `question_id` the model name identifies the candidate.

use serde::Deserialize;
use serde_json::{Map, Value};

use super::{derived_id, require_non_empty, row_error, Adapted};
use crate::error::Result;
use crate::model::AnnotationRecord;
use crate::quality::QualityMapping;

pub const QUIZ_DESIGN_LABELS: [&str; 4] = ["No Error", "Disfluent", "Off Target", "Wrong Context"];

const SOURCE: &str = "quiz_design";

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct QuizDesignRow {
    #[serde(default)]
    pub context_id: Option<String>,
    pub context: String,
    #[serde(default, alias = "answer_span")]
    pub answer: Option<String>,
    #[serde(alias = "model")]
    pub model_name: String,
    #[serde(default)]
    pub question_id: Option<String>,
    pub question: String,
    pub label: String,
}

pub fn quiz_design_mapping() -> QualityMapping {
    QualityMapping::two_tier(
        [QUIZ_DESIGN_LABELS[0]],
        QUIZ_DESIGN_LABELS[1..].iter().copied(),
    )
    .expect("static mapping is valid")
}

/// "No Error" is high quality; each error type is low quality with itself as
/// the error category. All four labels are mutually comparable.
pub fn adapt_quiz_design(rows: &[(usize, QuizDesignRow)]) -> Result<Adapted> {
    let mut records = Vec::with_capacity(rows.len());
    for (line, row) in rows {
        let line = *line;
        if !QUIZ_DESIGN_LABELS.contains(&row.label.as_str()) {
            return Err(row_error(
                SOURCE,
                line,
                format!(
                    "unknown label '{}' (expected one of {:?})",
                    row.label, QUIZ_DESIGN_LABELS
                ),
            ));
        }
        require_non_empty(SOURCE, line, "model_name", &row.model_name)?;
        let context_id = match &row.context_id {
            Some(id) => {
                require_non_empty(SOURCE, line, "context_id", id)?;
                id.clone()
            }
            None => derived_id(
                "qd",
                &[&row.context, row.answer.as_deref().unwrap_or_default()],
            ),
        };
        let context_text = match &row.answer {
            Some(answer) => format!("{}\n\nAnswer: {answer}", row.context),
            None => row.context.clone(),
        };
        records.push(AnnotationRecord {
            context_id,
            context_text,
            candidate_id: row
                .question_id
                .clone()
                .unwrap_or_else(|| row.model_name.clone()),
            candidate_text: row.question.clone(),
            model_id: row.model_name.clone(),
            label: Some(row.label.clone()),
            raw_scores: None,
            attribute: None,
        });
    }
    Ok(Adapted {
        records,
        mapping: quiz_design_mapping(),
        metadata: Map::<String, Value>::new(),
        dropped: 0,
    })
}
