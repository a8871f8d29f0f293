use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use log::{info, warn};
use nnd_core::io::suite_fingerprint;
use nnd_core::{administer_suite, aggregate, GroupKeys, NndTest, ScoreIndex};
use serde_json::{json, Map, Value};

use super::{load_scores, load_suite, ResultDocument};
use crate::config::Effective;
use crate::output::{emit, file_name, to_json};
use crate::render::{self, ModelResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_name = "PATH")]
    pub suite: PathBuf,
    /// Directory receiving one `<model>.json` result file per evaluated model.
    #[arg(long, value_name = "DIR")]
    pub results: Option<PathBuf>,
    /// Score files; a file may interleave several models.
    #[arg(required = true, value_name = "SCORES")]
    pub scores: Vec<PathBuf>,
}

pub(crate) fn index_scores(paths: &[PathBuf]) -> anyhow::Result<ScoreIndex> {
    let mut index = ScoreIndex::new();
    for path in paths {
        let file = load_scores(path)?;
        for (line, s) in file.entries {
            index
                .insert(s)
                .with_context(|| format!("{}:{line}", path.display()))?;
        }
    }
    Ok(index)
}

/// Administers and aggregates every model found in `index`, sorted by model.
pub(crate) fn evaluate(
    suite: &[NndTest],
    index: &ScoreIndex,
    config: &Effective,
) -> anyhow::Result<Vec<ModelResult>> {
    let mut results = Vec::new();
    for model in index.models() {
        let admin = administer_suite(suite, index, model)?;
        if admin.outcomes.is_empty() {
            warn!("model {model}: no test has both sides scored; reported as unevaluated");
            results.push(ModelResult::Unevaluated {
                model_id: model.to_string(),
            });
            continue;
        }
        if !admin.unscored.is_empty() {
            warn!(
                "model {model}: {} of {} tests unscored and left out",
                admin.unscored.len(),
                suite.len()
            );
        }
        let mut result = aggregate(
            &admin.outcomes,
            GroupKeys::default(),
            config.bootstrap.as_ref(),
        )?;
        result.n_unscored = admin.unscored.len();
        results.push(ModelResult::Evaluated(result));
    }
    Ok(results)
}

pub(crate) fn provenance(
    suite_path: &Path,
    suite: &[NndTest],
    score_paths: &[PathBuf],
    config: &Effective,
) -> anyhow::Result<Map<String, Value>> {
    let mut p = Map::new();
    p.insert("suite".into(), json!(file_name(suite_path)));
    p.insert("suite_fingerprint".into(), json!(suite_fingerprint(suite)));
    let files: Vec<String> = score_paths.iter().map(|s| file_name(s)).collect();
    p.insert("score_files".into(), json!(files));
    p.insert("config".into(), json!({ "bootstrap": config.bootstrap }));
    Ok(p)
}

/// File name for a model's result; characters outside `[A-Za-z0-9._-]`
/// become `_`.
pub fn result_file_name(model_id: &str) -> String {
    let safe: String = model_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "._-".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{safe}.json")
}

fn write_results(dir: &Path, docs: &[ResultDocument]) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut names = BTreeSet::new();
    for doc in docs {
        let name = result_file_name(&doc.result.model_id);
        if !names.insert(name.clone()) {
            bail!("two models map to result file {name}");
        }
        let path = dir.join(&name);
        std::fs::write(&path, to_json(doc)?)
            .with_context(|| format!("writing {}", path.display()))?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

pub(crate) fn render(
    results: &[ModelResult],
    extra: Value,
    config: &Effective,
) -> anyhow::Result<String> {
    use crate::config::Format;
    Ok(match config.format {
        Format::Table => render::table(results),
        Format::Csv => render::csv(results)?,
        Format::Svg => render::bar_chart(results),
        Format::Json => {
            let evaluated: Vec<_> = results
                .iter()
                .filter_map(|m| match m {
                    ModelResult::Evaluated(r) => Some(r),
                    ModelResult::Unevaluated { .. } => None,
                })
                .collect();
            let unevaluated: Vec<&str> = results
                .iter()
                .filter(|m| matches!(m, ModelResult::Unevaluated { .. }))
                .map(ModelResult::model_id)
                .collect();
            let mut doc = json!({ "results": evaluated, "unevaluated": unevaluated });
            if let (Value::Object(d), Value::Object(e)) = (&mut doc, extra) {
                d.extend(e);
            }
            to_json(&doc)?
        }
    })
}

pub fn run(args: &Args, config: &Effective, out: Option<&Path>) -> anyhow::Result<()> {
    let suite = load_suite(&args.suite)?.tests;
    let index = index_scores(&args.scores)?;
    if index.models().next().is_none() {
        bail!("no score lines found");
    }
    let results = evaluate(&suite, &index, config)?;
    let prov = provenance(&args.suite, &suite, &args.scores, config)?;
    if let Some(dir) = &args.results {
        let docs: Vec<ResultDocument> = results
            .iter()
            .filter_map(|m| match m {
                ModelResult::Evaluated(r) => Some(ResultDocument {
                    result: r.clone(),
                    provenance: prov.clone(),
                }),
                ModelResult::Unevaluated { .. } => None,
            })
            .collect();
        write_results(dir, &docs)?;
    }
    emit(
        out,
        &render(&results, json!({ "provenance": prov }), config)?,
    )
}
