use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use log::warn;
use nnd_core::io::{ScoreHeader, SCORES_SCHEMA};
use nnd_core::{ScoredCandidate, Side};
use serde::Serialize;
use serde_json::Value;

use super::{load_suite, open};
use crate::config::{Effective, Format};
use crate::output::{emit, file_name, to_json};
use crate::ValidationFailure;

/// Log-probabilities above zero by more than this are impossible.
const POSITIVE_SLACK: f64 = 1e-6;
/// Listing cap in the table rendering; JSON lists everything.
const LIST_LIMIT: usize = 10;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_name = "PATH")]
    pub suite: PathBuf,
    /// Score files (nnd-scores/1 JSON Lines); models may be interleaved.
    #[arg(required = true, value_name = "SCORES")]
    pub scores: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Problem {
    pub file: String,
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ModelCoverage {
    pub n_covered: usize,
    pub coverage: f64,
    /// Tests lacking a usable score on at least one side.
    pub missing: Vec<String>,
    /// `test_id/side` marked unscorable by the scorer.
    pub unscorable: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub n_tests: usize,
    pub models: BTreeMap<String, ModelCoverage>,
    /// Lines referring to test ids not in the suite.
    pub orphans: Vec<Problem>,
    /// Repeats of an identical line.
    pub duplicates: Vec<Problem>,
    /// Hard violations: malformed lines, conflicting repeats, bad values.
    pub violations: Vec<Problem>,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn value_problem(s: &ScoredCandidate) -> Option<String> {
    if s.unscorable.is_some() {
        return None;
    }
    if s.token_logprobs.is_empty() {
        return Some("empty token_logprobs".into());
    }
    if s.token_count != s.token_logprobs.len() {
        return Some(format!(
            "token_count {} but {} log-probabilities",
            s.token_count,
            s.token_logprobs.len()
        ));
    }
    if let Some(i) = s.token_logprobs.iter().position(|v| !v.is_finite()) {
        return Some(format!("non-finite log-probability at token {i}"));
    }
    if let Some(i) = s.token_logprobs.iter().position(|v| *v > POSITIVE_SLACK) {
        return Some(format!(
            "positive log-probability {} at token {i}",
            s.token_logprobs[i]
        ));
    }
    None
}

type Key = (String, String, Side);

/// Checks score files against a suite. Problems are collected rather than
/// raised so a single run reports all of them.
pub fn check(suite_ids: &BTreeSet<String>, files: &[PathBuf]) -> anyhow::Result<CheckReport> {
    let mut seen: HashMap<Key, (ScoredCandidate, String, usize)> = HashMap::new();
    let mut usable: BTreeMap<String, BTreeSet<(String, Side)>> = BTreeMap::new();
    let mut unscorable: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut report = CheckReport {
        n_tests: suite_ids.len(),
        models: BTreeMap::new(),
        orphans: Vec::new(),
        duplicates: Vec::new(),
        violations: Vec::new(),
    };

    for path in files {
        let name = file_name(path);
        let problem = |line: usize, reason: String| Problem {
            file: name.clone(),
            line,
            reason,
        };
        let mut first = true;
        for (idx, line) in open(path)?.lines().enumerate() {
            let line_no = idx + 1;
            let text = line.with_context(|| format!("reading {}", path.display()))?;
            if text.trim().is_empty() {
                continue;
            }
            let is_first = std::mem::replace(&mut first, false);
            let value: Value = match serde_json::from_str(&text) {
                Ok(v) => v,
                Err(e) => {
                    report
                        .violations
                        .push(problem(line_no, format!("malformed JSON: {e}")));
                    continue;
                }
            };
            if value.get("schema").is_some() {
                let reason = if !is_first {
                    Some("header must be the first line".to_string())
                } else {
                    match serde_json::from_value::<ScoreHeader>(value) {
                        Ok(h) if h.schema == SCORES_SCHEMA => None,
                        Ok(h) => Some(format!("unsupported score schema '{}'", h.schema)),
                        Err(e) => Some(format!("malformed header: {e}")),
                    }
                };
                if let Some(r) = reason {
                    report.violations.push(problem(line_no, r));
                }
                continue;
            }
            let s: ScoredCandidate = match serde_json::from_value(value) {
                Ok(s) => s,
                Err(e) => {
                    report
                        .violations
                        .push(problem(line_no, format!("malformed score line: {e}")));
                    continue;
                }
            };
            report.models.entry(s.model_id.clone()).or_default();
            if !suite_ids.contains(&s.test_id) {
                report.orphans.push(problem(
                    line_no,
                    format!(
                        "test_id {} is not in the suite (model {})",
                        s.test_id, s.model_id
                    ),
                ));
                continue;
            }
            if let Some(reason) = value_problem(&s) {
                report.violations.push(problem(
                    line_no,
                    format!("{} {} ({}): {reason}", s.test_id, s.side, s.model_id),
                ));
                continue;
            }
            let key = (s.model_id.clone(), s.test_id.clone(), s.side);
            if let Some((prev, prev_file, prev_line)) = seen.get(&key) {
                let what = format!("{} {} ({})", s.test_id, s.side, s.model_id);
                if *prev == s {
                    report.duplicates.push(problem(
                        line_no,
                        format!("{what} repeats {prev_file}:{prev_line}"),
                    ));
                } else {
                    report.violations.push(problem(
                        line_no,
                        format!("{what} conflicts with {prev_file}:{prev_line}"),
                    ));
                }
                continue;
            }
            if let Some(reason) = &s.unscorable {
                unscorable
                    .entry(s.model_id.clone())
                    .or_default()
                    .push(format!("{}/{}: {reason}", s.test_id, s.side));
            } else {
                usable
                    .entry(s.model_id.clone())
                    .or_default()
                    .insert((s.test_id.clone(), s.side));
            }
            seen.insert(key, (s, name.clone(), line_no));
        }
    }

    for (model, cov) in report.models.iter_mut() {
        let sides = usable.remove(model).unwrap_or_default();
        for id in suite_ids {
            let both = [Side::High, Side::Low]
                .iter()
                .all(|side| sides.contains(&(id.clone(), *side)));
            if both {
                cov.n_covered += 1;
            } else {
                cov.missing.push(id.clone());
            }
        }
        cov.coverage = if suite_ids.is_empty() {
            1.0
        } else {
            cov.n_covered as f64 / suite_ids.len() as f64
        };
        cov.unscorable = unscorable.remove(model).unwrap_or_default();
    }
    Ok(report)
}

fn percent(c: f64) -> String {
    if c == 1.0 {
        "100%".into()
    } else {
        format!("{:.1}%", c * 100.0)
    }
}

fn listed(out: &mut String, items: &[String]) {
    for item in items.iter().take(LIST_LIMIT) {
        let _ = writeln!(out, "    {item}");
    }
    if items.len() > LIST_LIMIT {
        let _ = writeln!(out, "    ... and {} more", items.len() - LIST_LIMIT);
    }
}

pub fn render_table(r: &CheckReport) -> String {
    let mut out = format!("suite: {} tests\n", r.n_tests);
    if r.models.is_empty() {
        out.push_str("no score lines found\n");
    }
    for (model, c) in &r.models {
        let _ = writeln!(
            out,
            "model {model}: coverage {} ({}/{})",
            percent(c.coverage),
            c.n_covered,
            r.n_tests
        );
        if !c.missing.is_empty() {
            let _ = writeln!(out, "  missing {}:", c.missing.len());
            listed(&mut out, &c.missing);
        }
        if !c.unscorable.is_empty() {
            let _ = writeln!(out, "  unscorable {}:", c.unscorable.len());
            listed(&mut out, &c.unscorable);
        }
    }
    for (title, items) in [
        ("orphan lines", &r.orphans),
        ("identical duplicates", &r.duplicates),
        ("violations", &r.violations),
    ] {
        if items.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{title} {}:", items.len());
        let lines: Vec<String> = items
            .iter()
            .map(|p| format!("{}:{}: {}", p.file, p.line, p.reason))
            .collect();
        listed(&mut out, &lines);
    }
    let _ = writeln!(out, "{}", if r.ok() { "ok" } else { "FAILED" });
    out
}

pub fn run(args: &Args, config: &Effective, out: Option<&Path>) -> anyhow::Result<()> {
    let suite = load_suite(&args.suite)?;
    let ids: BTreeSet<String> = suite.tests.into_iter().map(|t| t.test_id).collect();
    let report = check(&ids, &args.scores)?;
    for p in &report.orphans {
        warn!("{}:{}: orphan: {}", p.file, p.line, p.reason);
    }
    for p in &report.duplicates {
        warn!("{}:{}: duplicate: {}", p.file, p.line, p.reason);
    }
    let rendered = match config.format {
        Format::Table => render_table(&report),
        Format::Json => to_json(&report)?,
        other => bail!("check-scores supports table or json output, not {other:?}"),
    };
    emit(out, &rendered)?;
    if report.ok() {
        Ok(())
    } else {
        Err(ValidationFailure(format!(
            "{} hard violation(s) in score files",
            report.violations.len()
        ))
        .into())
    }
}
