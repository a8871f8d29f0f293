use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use log::warn;
use nnd_core::io::suite_fingerprint;
use nnd_core::{ScoreIndex, SuiteResult};
use serde::Serialize;
use serde_json::json;

use super::{load_scores, load_suite};
use crate::commands::administer::evaluate;
use crate::config::{Effective, Format};
use crate::output::{emit, file_name, to_json};
use crate::render::{self, ModelResult, SeriesRow};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_name = "PATH")]
    pub suite: PathBuf,
    /// Directory of score files (`*.jsonl`), each with a `step` in its header.
    #[arg(long, value_name = "DIR")]
    pub scores_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub step: i64,
    pub source: String,
    pub suite_result: SuiteResult,
}

#[derive(Debug, Serialize)]
struct SeriesOutput {
    suite_fingerprint: String,
    config: serde_json::Value,
    /// Points per model, sorted by step.
    series: BTreeMap<String, Vec<SeriesPoint>>,
}

fn score_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "jsonl") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn run(args: &Args, config: &Effective, out: Option<&Path>) -> anyhow::Result<()> {
    let suite = load_suite(&args.suite)?.tests;
    let mut series: BTreeMap<String, BTreeMap<i64, SeriesPoint>> = BTreeMap::new();
    for path in score_files(&args.scores_dir)? {
        let file = load_scores(&path)?;
        let Some(step) = file.step() else {
            warn!("{}: no step in header; skipped", path.display());
            continue;
        };
        let mut index = ScoreIndex::new();
        for (line, s) in file.entries {
            index
                .insert(s)
                .with_context(|| format!("{}:{line}", path.display()))?;
        }
        for m in evaluate(&suite, &index, config)? {
            let ModelResult::Evaluated(result) = m else {
                continue;
            };
            let points = series.entry(result.model_id.clone()).or_default();
            if let Some(prev) = points.get(&step) {
                bail!(
                    "step {step} for model {} appears in both {} and {}",
                    result.model_id,
                    prev.source,
                    file_name(&path)
                );
            }
            points.insert(
                step,
                SeriesPoint {
                    step,
                    source: file_name(&path),
                    suite_result: result,
                },
            );
        }
    }
    if series.is_empty() {
        warn!("no usable score files in {}", args.scores_dir.display());
    }

    let output = SeriesOutput {
        suite_fingerprint: suite_fingerprint(&suite),
        config: json!({ "bootstrap": config.bootstrap }),
        series: series
            .into_iter()
            .map(|(m, pts)| (m, pts.into_values().collect()))
            .collect(),
    };
    let rows: Vec<SeriesRow<'_>> = output
        .series
        .values()
        .flatten()
        .map(|p| SeriesRow {
            step: p.step,
            result: &p.suite_result,
        })
        .collect();
    let rendered = match config.format {
        Format::Table => render::series_table(&rows),
        Format::Csv => render::series_csv(&rows)?,
        Format::Svg => render::series_chart(&rows),
        Format::Json => to_json(&output)?,
    };
    emit(out, &rendered)
}
