pub mod administer;
pub mod build;
pub mod check_scores;
pub mod report;
pub mod series;
pub mod verify;

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::Context;
use nnd_core::io::{read_scores, read_suite, ScoreFile, SuiteFile};
use nnd_core::SuiteResult;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::render::ModelResult;

pub(crate) fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(file))
}

pub(crate) fn load_suite(path: &Path) -> anyhow::Result<SuiteFile> {
    read_suite(open(path)?).with_context(|| format!("reading suite {}", path.display()))
}

pub(crate) fn load_scores(path: &Path) -> anyhow::Result<ScoreFile> {
    read_scores(open(path)?).with_context(|| format!("reading scores {}", path.display()))
}

/// A result file: the suite result plus where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    #[serde(flatten)]
    pub result: SuiteResult,
    #[serde(default)]
    pub provenance: Map<String, Value>,
}

pub(crate) fn load_result(path: &Path) -> anyhow::Result<ResultDocument> {
    serde_json::from_reader(open(path)?)
        .with_context(|| format!("reading result {}", path.display()))
}

/// Loads result files, rejecting two files for the same model. Output is
/// sorted by model id.
pub(crate) fn load_results(paths: &[std::path::PathBuf]) -> anyhow::Result<Vec<ResultDocument>> {
    let mut docs: Vec<ResultDocument> = paths
        .iter()
        .map(|p| load_result(p))
        .collect::<anyhow::Result<_>>()?;
    docs.sort_by(|a, b| a.result.model_id.cmp(&b.result.model_id));
    if let Some(w) = docs
        .windows(2)
        .find(|w| w[0].result.model_id == w[1].result.model_id)
    {
        anyhow::bail!("two result files for model '{}'", w[0].result.model_id);
    }
    Ok(docs)
}

pub(crate) fn evaluated(docs: &[ResultDocument]) -> Vec<ModelResult> {
    docs.iter()
        .map(|d| ModelResult::Evaluated(d.result.clone()))
        .collect()
}
