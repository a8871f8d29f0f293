use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use log::warn;
use nnd_core::adapters::{self, Adapted, CategoryMap, DatasetKind};
use nnd_core::io::{suite_fingerprint, write_suite, SuiteHeader, SUITE_SCHEMA};
use nnd_core::{compile_suite, MappingConfig, NndTest, QualityMapping};
use serde::Serialize;
use serde_json::{json, Map, Value};

use super::open;
use crate::config::{Effective, Format};
use crate::output::{emit, file_name, to_json};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// quiz_design, challenge300, summeval, frank or generic.
    #[arg(long)]
    pub kind: DatasetKind,
    /// Annotations as JSON Lines or a JSON array.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Label mapping (generic, required) or category map (challenge300).
    #[arg(long, value_name = "PATH")]
    pub mapping: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct BuildReport {
    dataset: String,
    n_records: usize,
    dropped: usize,
    n_tests: usize,
    fingerprint: String,
    per_category: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    per_attribute: BTreeMap<String, usize>,
}

fn load_mapping(path: &Path) -> anyhow::Result<QualityMapping> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config: MappingConfig = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text)?
    } else {
        serde_json::from_str(&text)?
    };
    QualityMapping::try_from(config).with_context(|| format!("mapping {}", path.display()))
}

fn category_map(args: &Args, config: &Effective) -> anyhow::Result<CategoryMap> {
    match args
        .mapping
        .as_ref()
        .or(config.challenge300_category_map.as_ref())
    {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            CategoryMap::from_json(&text)
                .with_context(|| format!("category map {}", path.display()))
        }
        None => Ok(CategoryMap::challenge300_default()),
    }
}

fn adapt(args: &Args, config: &Effective) -> anyhow::Result<(Adapted, Map<String, Value>)> {
    let input = || open(&args.input);
    let mut echoed = Map::new();
    echoed.insert(
        "normalization".into(),
        serde_json::to_value(config.normalization)?,
    );
    if args.mapping.is_some()
        && !matches!(args.kind, DatasetKind::Generic | DatasetKind::Challenge300)
    {
        bail!("--mapping only applies to generic and challenge300 inputs");
    }
    let adapted = match args.kind {
        DatasetKind::QuizDesign => adapters::adapt_quiz_design(&adapters::read_rows(input()?)?)?,
        DatasetKind::Challenge300 => {
            let map = category_map(args, config)?;
            adapters::adapt_challenge300(&adapters::read_rows(input()?)?, &map)?
        }
        DatasetKind::SummEval => {
            echoed.insert("summeval".into(), serde_json::to_value(config.summeval)?);
            adapters::adapt_summeval(&adapters::read_rows(input()?)?, config.summeval)?
        }
        DatasetKind::Frank => {
            echoed.insert("frank".into(), serde_json::to_value(&config.frank)?);
            adapters::adapt_frank(&adapters::read_rows(input()?)?, &config.frank)?
        }
        DatasetKind::Generic => {
            let Some(path) = &args.mapping else {
                bail!("generic input needs --mapping");
            };
            let mapping = load_mapping(path)?;
            adapters::adapt_generic(&adapters::read_rows(input()?)?, &mapping)?
        }
    };
    Ok((adapted, echoed))
}

fn counts(suite: &[NndTest]) -> (BTreeMap<String, usize>, BTreeMap<String, usize>) {
    let mut per_category = BTreeMap::new();
    let mut per_attribute = BTreeMap::new();
    for t in suite {
        *per_category.entry(t.error_category.clone()).or_default() += 1;
        if let Some(a) = &t.attribute {
            *per_attribute.entry(a.clone()).or_default() += 1;
        }
    }
    (per_category, per_attribute)
}

fn render_table(r: &BuildReport) -> String {
    let split: Vec<String> = r.per_category.values().map(usize::to_string).collect();
    let mut out = format!("{} tests", r.n_tests);
    if !split.is_empty() {
        let _ = write!(out, " ({})", split.join("/"));
    }
    let _ = writeln!(out, " from {} records ({} dropped)", r.n_records, r.dropped);
    let width = r
        .per_category
        .keys()
        .chain(r.per_attribute.keys())
        .map(|k| k.chars().count())
        .max()
        .unwrap_or(0);
    for (title, map) in [
        ("category", &r.per_category),
        ("attribute", &r.per_attribute),
    ] {
        for (k, n) in map {
            let _ = writeln!(out, "{title:<9}  {k:<width$}  {n:>6}");
        }
    }
    let _ = writeln!(out, "fingerprint {}", r.fingerprint);
    out
}

pub fn run(args: &Args, config: &Effective, out: Option<&Path>) -> anyhow::Result<()> {
    let (adapted, echoed) = adapt(args, config)
        .with_context(|| format!("building {} suite from {}", args.kind, args.input.display()))?;
    let suite = compile_suite(&adapted.records, &adapted.mapping, &config.normalization)?;
    if suite.is_empty() {
        warn!("no tests generated from {}", args.input.display());
    }

    let mut metadata = Map::new();
    metadata.insert("source".into(), json!(file_name(&args.input)));
    metadata.insert("n_records".into(), json!(adapted.records.len()));
    metadata.insert("dropped".into(), json!(adapted.dropped));
    metadata.insert("mapping".into(), serde_json::to_value(&adapted.mapping)?);
    metadata.extend(adapted.metadata.clone());
    metadata.insert("config".into(), Value::Object(echoed));
    let header = SuiteHeader {
        schema: SUITE_SCHEMA.into(),
        dataset: args.kind.name().into(),
        n_tests: suite.len(),
        metadata,
    };

    let (per_category, per_attribute) = counts(&suite);
    let report = BuildReport {
        dataset: args.kind.name().into(),
        n_records: adapted.records.len(),
        dropped: adapted.dropped,
        n_tests: suite.len(),
        fingerprint: suite_fingerprint(&suite),
        per_category,
        per_attribute,
    };
    let rendered = match config.format {
        Format::Table => render_table(&report),
        Format::Json => to_json(&report)?,
        other => bail!("build reports support table or json output, not {other:?}"),
    };

    match out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            write_suite(std::io::BufWriter::new(file), Some(&header), &suite)?;
            emit(None, &rendered)
        }
        None => {
            write_suite(std::io::stdout().lock(), Some(&header), &suite)?;
            std::io::stderr().write_all(rendered.as_bytes())?;
            Ok(())
        }
    }
}
