use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use log::warn;
use nnd_core::stats::{verify, verify_breakdown, VerificationReport};
use serde::{Deserialize, Serialize};

use super::{load_results, open, ResultDocument};
use crate::config::{Effective, Format};
use crate::output::{emit, to_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BreakdownKind {
    Category,
    Attribute,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Human scores: `{"model": score, ...}`, or
    /// `{"overall": {...}, "by_key": {"key": {...}}}` for per-key scores.
    #[arg(long, value_name = "PATH")]
    pub human: PathBuf,
    /// Also verify each error category or attribute, with a macro average.
    #[arg(long, value_enum)]
    pub breakdown: Option<BreakdownKind>,
    #[arg(required = true, value_name = "RESULTS")]
    pub results: Vec<PathBuf>,
}

type Scores = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum HumanScores {
    Keyed {
        overall: Scores,
        #[serde(default)]
        by_key: BTreeMap<String, Scores>,
    },
    Flat(Scores),
}

impl HumanScores {
    fn parts(&self) -> (&Scores, Option<&BTreeMap<String, Scores>>) {
        match self {
            HumanScores::Keyed { overall, by_key } => (overall, Some(by_key)),
            HumanScores::Flat(s) => (s, None),
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum Report {
    Overall(VerificationReport),
    Breakdown(nnd_core::stats::BreakdownReport),
}

#[derive(Debug, Serialize)]
struct VerifyOutput {
    metric: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    breakdown: Option<BreakdownKind>,
    report: Report,
}

/// Per-key pass rates, keeping only keys every model has.
fn metric_by_key(docs: &[ResultDocument], kind: BreakdownKind) -> BTreeMap<String, Scores> {
    let mut by_key: BTreeMap<String, Scores> = BTreeMap::new();
    for d in docs {
        let map = match kind {
            BreakdownKind::Category => Some(&d.result.per_category),
            BreakdownKind::Attribute => d.result.per_attribute.as_ref(),
        };
        for (k, s) in map.into_iter().flatten() {
            by_key
                .entry(k.clone())
                .or_default()
                .insert(d.result.model_id.clone(), s.pass_rate);
        }
    }
    by_key.retain(|k, m| {
        let complete = m.len() == docs.len();
        if !complete {
            warn!("key '{k}' is missing for some models; left out of the breakdown");
        }
        complete
    });
    by_key
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}"))
        .unwrap_or_else(|| "degenerate".into())
}

fn render_table(o: &VerifyOutput) -> String {
    let mut out = String::new();
    let line = |out: &mut String, name: &str, r: &VerificationReport| {
        let _ = writeln!(
            out,
            "{name}: tau {}  gap r {}  ({} models, {} pairs)",
            fmt_opt(r.rank_tau),
            fmt_opt(r.gap_r),
            r.models.len(),
            r.n_pairs
        );
    };
    match &o.report {
        Report::Overall(r) => line(&mut out, "overall", r),
        Report::Breakdown(b) => {
            line(&mut out, "overall", &b.overall);
            for (k, r) in &b.per_key {
                line(&mut out, k, r);
            }
            let m = &b.macro_average;
            let _ = writeln!(
                out,
                "macro average: tau {} ({} keys)  gap r {} ({} keys)",
                fmt_opt(m.rank_tau),
                m.n_tau,
                fmt_opt(m.gap_r),
                m.n_r
            );
        }
    }
    out
}

pub fn run(args: &Args, config: &Effective, out: Option<&Path>) -> anyhow::Result<()> {
    let docs = load_results(&args.results)?;
    let human: HumanScores = serde_json::from_reader(open(&args.human)?)
        .with_context(|| format!("reading human scores {}", args.human.display()))?;
    let (human_overall, human_by_key) = human.parts();
    let metric: Scores = docs
        .iter()
        .map(|d| (d.result.model_id.clone(), d.result.overall_pass_rate))
        .collect();

    let report = match args.breakdown {
        None => Report::Overall(verify(&metric, human_overall)?),
        Some(kind) => {
            let by_key = metric_by_key(&docs, kind);
            let empty = BTreeMap::new();
            let human_keys = human_by_key.unwrap_or(&empty);
            let unknown: BTreeSet<&String> = human_keys
                .keys()
                .filter(|k| !by_key.contains_key(*k))
                .collect();
            if !unknown.is_empty() {
                warn!("human scores for unknown keys ignored: {unknown:?}");
            }
            Report::Breakdown(verify_breakdown(
                &metric,
                &by_key,
                human_overall,
                human_keys,
            )?)
        }
    };
    let output = VerifyOutput {
        metric: "pass_rate",
        breakdown: args.breakdown,
        report,
    };
    let rendered = match config.format {
        Format::Table => render_table(&output),
        Format::Json => to_json(&output)?,
        other => bail!("verify supports table or json output, not {other:?}"),
    };
    emit(out, &rendered)
}
