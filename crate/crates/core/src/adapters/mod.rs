//! Source-format adapters turning published human-evaluation files into
//! [`AnnotationRecord`] streams plus the [`QualityMapping`] that governs them.
//!
//! Every adapter takes rows tagged with their source position (1-based line
//! number for JSON Lines, element number for a top-level JSON array) so
//! errors can point back into the input.

mod challenge300;
mod frank;
mod generic;
mod quiz_design;
mod summeval;

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

pub use challenge300::{adapt_challenge300, CategoryMap, Challenge300Row};
pub use frank::{adapt_frank, FrankOptions, FrankRow};
pub use generic::{adapt_generic, GenericRow};
pub use quiz_design::{adapt_quiz_design, QuizDesignRow, QUIZ_DESIGN_LABELS};
pub use summeval::{adapt_summeval, Annotators, LikertRatings, SummEvalOptions, SummEvalRow};

use crate::error::{NndError, Result};
use crate::model::AnnotationRecord;
use crate::quality::QualityMapping;

/// Adapter output: records ready for [`compile_suite`](crate::compile_suite).
#[derive(Debug, Clone)]
pub struct Adapted {
    pub records: Vec<AnnotationRecord>,
    pub mapping: QualityMapping,
    /// Adapter settings worth recording in the suite header.
    pub metadata: Map<String, Value>,
    /// Source rows dropped by design (e.g. FRANK "Other", non-test splits).
    pub dropped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DatasetKind {
    QuizDesign,
    Challenge300,
    SummEval,
    Frank,
    Generic,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 5] = [
        DatasetKind::QuizDesign,
        DatasetKind::Challenge300,
        DatasetKind::SummEval,
        DatasetKind::Frank,
        DatasetKind::Generic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::QuizDesign => "quiz_design",
            DatasetKind::Challenge300 => "challenge300",
            DatasetKind::SummEval => "summeval",
            DatasetKind::Frank => "frank",
            DatasetKind::Generic => "generic",
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DatasetKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        DatasetKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = DatasetKind::ALL.iter().map(|k| k.name()).collect();
                format!(
                    "unknown dataset kind '{s}' (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// Reads rows from JSON Lines, or from a single top-level JSON array.
pub fn read_rows<T: DeserializeOwned, R: Read>(mut reader: R) -> Result<Vec<(usize, T)>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let values: Vec<(usize, Value)> = if text.trim_start().starts_with('[') {
        let array: Vec<Value> = serde_json::from_str(&text).map_err(|e| NndError::Parse {
            line: e.line(),
            reason: format!("invalid JSON array: {e}"),
        })?;
        array
            .into_iter()
            .enumerate()
            .map(|(i, v)| (i + 1, v))
            .collect()
    } else {
        crate::io::read_json_lines(text.as_bytes())?
    };
    values
        .into_iter()
        .map(|(line, v)| Ok((line, crate::io::from_line(line, v)?)))
        .collect()
}

/// Convenience for rows built in code: numbers them from 1.
pub fn numbered<T>(rows: impl IntoIterator<Item = T>) -> Vec<(usize, T)> {
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| (i + 1, r))
        .collect()
}

fn row_error(source: &str, line: usize, reason: impl fmt::Display) -> NndError {
    NndError::adapter(source, format!("line {line}: {reason}"))
}

fn require_non_empty(source: &str, line: usize, field: &str, value: &str) -> Result<()> {
    if value.trim().is_empty() {
        Err(row_error(source, line, format!("field '{field}' is empty")))
    } else {
        Ok(())
    }
}

/// Stable identifier for sources that do not ship one.
fn derived_id(prefix: &str, parts: &[&str]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update((p.len() as u64).to_le_bytes());
        hasher.update(p.as_bytes());
    }
    let hex: String = hasher.finalize()[..6]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    format!("{prefix}-{hex}")
}
