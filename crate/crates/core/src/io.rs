//! JSON Lines wire formats for suites and score files.
//!
//! Suite file: an optional header object carrying `"schema": "nnd-suite/1"`
//! followed by one [`NndTest`] per line, sorted by test id.
//!
//! Score file: an optional header `{"schema": "nnd-scores/1", "step": N, ...}`
//! followed by one [`ScoredCandidate`] per line. Extra header keys (model
//! name, tokenizer, EOS handling) are preserved but not interpreted.

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{NndError, Result};
use crate::model::{NndTest, ScoredCandidate};

pub const SUITE_SCHEMA: &str = "nnd-suite/1";
pub const SCORES_SCHEMA: &str = "nnd-scores/1";

/// Suite provenance written as the first line of a suite file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteHeader {
    pub schema: String,
    /// Adapter that produced the suite.
    pub dataset: String,
    pub n_tests: usize,
    /// Everything else the build wants to record: mapping, category map,
    /// normalization settings, effective config.
    #[serde(flatten)]
    pub metadata: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreHeader {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<i64>,
    #[serde(flatten)]
    pub metadata: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteFile {
    pub header: Option<SuiteHeader>,
    pub tests: Vec<NndTest>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreFile {
    pub header: Option<ScoreHeader>,
    /// Entries with their 1-based line numbers.
    pub entries: Vec<(usize, ScoredCandidate)>,
}

impl ScoreFile {
    pub fn step(&self) -> Option<i64> {
        self.header.as_ref().and_then(|h| h.step)
    }
}

/// Reads non-blank lines as JSON values, tagging each with its line number.
pub fn read_json_lines<R: BufRead>(reader: R) -> Result<Vec<(usize, Value)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(trimmed).map_err(|e| NndError::Parse {
            line: line_no,
            reason: format!("invalid JSON: {e}"),
        })?;
        if !value.is_object() {
            return Err(NndError::Parse {
                line: line_no,
                reason: "record must be a JSON object".into(),
            });
        }
        out.push((line_no, value));
    }
    Ok(out)
}

/// Deserializes a JSON value, attributing failures to `line`.
pub fn from_line<T: DeserializeOwned>(line: usize, value: Value) -> Result<T> {
    serde_json::from_value(value).map_err(|e| NndError::Parse {
        line,
        reason: e.to_string(),
    })
}

fn schema_of(value: &Value) -> Option<&str> {
    value.get("schema").and_then(Value::as_str)
}

pub fn read_suite<R: BufRead>(reader: R) -> Result<SuiteFile> {
    let mut lines = read_json_lines(reader)?.into_iter().peekable();
    let mut header = None;
    if let Some((line, value)) = lines.peek() {
        if let Some(schema) = schema_of(value) {
            if schema != SUITE_SCHEMA {
                return Err(NndError::Parse {
                    line: *line,
                    reason: format!("unsupported suite schema '{schema}'"),
                });
            }
            let (line, value) = lines.next().expect("peeked");
            header = Some(from_line::<SuiteHeader>(line, value)?);
        }
    }
    let mut tests: Vec<NndTest> = Vec::new();
    for (line, value) in lines {
        if schema_of(&value).is_some() {
            return Err(NndError::Parse {
                line,
                reason: "header must be the first line".into(),
            });
        }
        let test: NndTest = from_line(line, value)?;
        if let Some(prev) = tests.last() {
            if prev.test_id >= test.test_id {
                return Err(NndError::Parse {
                    line,
                    reason: format!(
                        "test ids must be strictly increasing ('{}' follows '{}')",
                        test.test_id, prev.test_id
                    ),
                });
            }
        }
        tests.push(test);
    }
    Ok(SuiteFile { header, tests })
}

pub fn write_suite<W: Write>(
    mut writer: W,
    header: Option<&SuiteHeader>,
    tests: &[NndTest],
) -> Result<()> {
    if let Some(h) = header {
        serde_json::to_writer(&mut writer, h)?;
        writer.write_all(b"\n")?;
    }
    for t in tests {
        serde_json::to_writer(&mut writer, t)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_scores<R: BufRead>(reader: R) -> Result<ScoreFile> {
    let mut header = None;
    let mut entries = Vec::new();
    for (idx, (line, value)) in read_json_lines(reader)?.into_iter().enumerate() {
        match schema_of(&value) {
            Some(schema) if idx == 0 => {
                if schema != SCORES_SCHEMA {
                    return Err(NndError::Parse {
                        line,
                        reason: format!("unsupported score schema '{schema}'"),
                    });
                }
                header = Some(from_line::<ScoreHeader>(line, value)?);
            }
            Some(_) => {
                return Err(NndError::Parse {
                    line,
                    reason: "header must be the first line".into(),
                })
            }
            None => entries.push((line, from_line::<ScoredCandidate>(line, value)?)),
        }
    }
    Ok(ScoreFile { header, entries })
}

pub fn write_scores<W: Write>(
    mut writer: W,
    header: Option<&ScoreHeader>,
    scores: &[ScoredCandidate],
) -> Result<()> {
    if let Some(h) = header {
        serde_json::to_writer(&mut writer, h)?;
        writer.write_all(b"\n")?;
    }
    for s in scores {
        serde_json::to_writer(&mut writer, s)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

/// Identity of a suite: first 16 hex digits of SHA-256 over its sorted test ids.
pub fn suite_fingerprint(tests: &[NndTest]) -> String {
    let mut ids: Vec<&str> = tests.iter().map(|t| t.test_id.as_str()).collect();
    ids.sort_unstable();
    let mut hasher = Sha256::new();
    for id in ids {
        hasher.update(id.as_bytes());
        hasher.update(b"\n");
    }
    hasher.finalize()[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
