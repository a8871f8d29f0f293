//! Text, CSV and SVG renderings of suite results. Tables show pass rates as
//! percentages with one decimal; CSV keeps full precision.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use nnd_core::{RateSummary, SuiteResult};

/// One model's row in a report.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelResult {
    Evaluated(SuiteResult),
    /// No test had both sides scored.
    Unevaluated {
        model_id: String,
    },
}

impl ModelResult {
    pub fn model_id(&self) -> &str {
        match self {
            ModelResult::Evaluated(r) => &r.model_id,
            ModelResult::Unevaluated { model_id } => model_id,
        }
    }

    fn evaluated(&self) -> Option<&SuiteResult> {
        match self {
            ModelResult::Evaluated(r) => Some(r),
            ModelResult::Unevaluated { .. } => None,
        }
    }
}

pub fn pct(rate: f64) -> String {
    format!("{:.1}", rate * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Breakdown {
    Category,
    Attribute,
}

fn breakdown(
    r: &SuiteResult,
    b: Breakdown,
) -> Option<&std::collections::BTreeMap<String, RateSummary>> {
    match b {
        Breakdown::Category => Some(&r.per_category),
        Breakdown::Attribute => r.per_attribute.as_ref(),
    }
}

fn interval(r: &SuiteResult, b: Breakdown, key: &str) -> Option<(f64, f64)> {
    let ci = r.ci95.as_ref()?;
    match b {
        Breakdown::Category => ci.per_category.get(key).copied(),
        Breakdown::Attribute => ci.per_attribute.as_ref()?.get(key).copied(),
    }
}

fn keys(results: &[&SuiteResult], b: Breakdown) -> Vec<String> {
    let set: BTreeSet<&String> = results
        .iter()
        .filter_map(|r| breakdown(r, b))
        .flat_map(|m| m.keys())
        .collect();
    set.into_iter().cloned().collect()
}

/// Attribute columns are shown only when they add something beyond the
/// category columns.
fn attribute_keys(results: &[&SuiteResult]) -> Vec<String> {
    let attrs = keys(results, Breakdown::Attribute);
    if attrs == keys(results, Breakdown::Category) {
        Vec::new()
    } else {
        attrs
    }
}

fn cell(rate: f64, ci: Option<(f64, f64)>) -> String {
    match ci {
        Some((lo, hi)) => format!("{} [{}, {}]", pct(rate), pct(lo), pct(hi)),
        None => pct(rate),
    }
}

/// Left-aligned first column, right-aligned rest.
fn layout(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        let mut line = String::new();
        for (i, (c, w)) in row.iter().zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(line, "{c:<w$}");
            } else {
                let _ = write!(line, "  {c:>w$}");
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Side-by-side pass-rate table, one row per model and one column per
/// error category (then per attribute, when those differ).
pub fn table(results: &[ModelResult]) -> String {
    let evaluated: Vec<&SuiteResult> = results.iter().filter_map(ModelResult::evaluated).collect();
    let cats = keys(&evaluated, Breakdown::Category);
    let attrs = attribute_keys(&evaluated);
    let show_unscored = evaluated.iter().any(|r| r.n_unscored > 0);

    let mut header = vec!["Model".to_string(), "Tests".to_string()];
    if show_unscored {
        header.push("Unscored".into());
    }
    header.push("Overall".into());
    header.extend(cats.iter().cloned());
    header.extend(attrs.iter().map(|a| format!("[{a}]")));

    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|m| match m {
            ModelResult::Evaluated(r) => {
                let mut row = vec![r.model_id.clone(), r.n_tests.to_string()];
                if show_unscored {
                    row.push(r.n_unscored.to_string());
                }
                row.push(cell(
                    r.overall_pass_rate,
                    r.ci95.as_ref().map(|c| c.overall),
                ));
                for (b, ks) in [(Breakdown::Category, &cats), (Breakdown::Attribute, &attrs)] {
                    for k in ks {
                        row.push(match breakdown(r, b).and_then(|m| m.get(k)) {
                            Some(s) => cell(s.pass_rate, interval(r, b, k)),
                            None => "-".into(),
                        });
                    }
                }
                row
            }
            ModelResult::Unevaluated { model_id } => {
                let mut row = vec![model_id.clone(), "unevaluated".into()];
                row.resize(header.len(), "-".into());
                row
            }
        })
        .collect();
    layout(&header, &rows)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn csv_finish(w: csv::Writer<Vec<u8>>) -> anyhow::Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| anyhow::anyhow!("writing csv: {e}"))?;
    Ok(String::from_utf8(bytes)?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Long format: one row per model and breakdown key, full precision.
pub fn csv(results: &[ModelResult]) -> anyhow::Result<String> {
    let mut w = csv_writer();
    w.write_record([
        "model",
        "breakdown",
        "key",
        "n_tests",
        "n_passed",
        "pass_rate",
        "ci_low",
        "ci_high",
    ])?;
    for m in results {
        let r = match m {
            ModelResult::Evaluated(r) => r,
            ModelResult::Unevaluated { model_id } => {
                w.write_record([model_id.as_str(), "unevaluated", "", "0", "0", "", "", ""])?;
                continue;
            }
        };
        let ci = r.ci95.as_ref().map(|c| c.overall);
        w.write_record([
            r.model_id.clone(),
            "overall".into(),
            String::new(),
            r.n_tests.to_string(),
            r.n_passed.to_string(),
            r.overall_pass_rate.to_string(),
            opt(ci.map(|c| c.0)),
            opt(ci.map(|c| c.1)),
        ])?;
        for (b, name) in [
            (Breakdown::Category, "category"),
            (Breakdown::Attribute, "attribute"),
        ] {
            for (k, s) in breakdown(r, b).into_iter().flatten() {
                let ci = interval(r, b, k);
                w.write_record([
                    r.model_id.clone(),
                    name.into(),
                    k.clone(),
                    s.n_tests.to_string(),
                    s.n_passed.to_string(),
                    s.pass_rate.to_string(),
                    opt(ci.map(|c| c.0)),
                    opt(ci.map(|c| c.1)),
                ])?;
            }
        }
    }
    csv_finish(w)
}

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const PLOT_TOP: f64 = 40.0;
const PLOT_HEIGHT: f64 = 240.0;
const PLOT_LEFT: f64 = 50.0;

fn y_of(rate: f64) -> f64 {
    PLOT_TOP + PLOT_HEIGHT * (1.0 - rate)
}

fn y_axis(svg: &mut String, width: f64) {
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let y = y_of(tick);
        let _ = writeln!(
            svg,
            r##"<line x1="{PLOT_LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##,
            width - 10.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"#,
            PLOT_LEFT - 4.0,
            y + 3.0,
            (tick * 100.0) as u32
        );
    }
}

fn legend(svg: &mut String, entries: &[(String, &str, &str)]) {
    let mut x = PLOT_LEFT;
    for (label, color, dash) in entries {
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.1}" y1="16" x2="{:.1}" y2="16" stroke="{color}" stroke-width="6"{dash}/>"#,
            x + 14.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="20" font-size="11">{}</text>"#,
            x + 18.0,
            escape(label)
        );
        x += 30.0 + 7.0 * label.chars().count() as f64;
    }
}

/// Grouped bar chart: one group per breakdown key, one bar per model.
pub fn bar_chart(results: &[ModelResult]) -> String {
    let evaluated: Vec<&SuiteResult> = results.iter().filter_map(ModelResult::evaluated).collect();
    let cats = keys(&evaluated, Breakdown::Category);
    let mut groups = vec!["Overall".to_string()];
    groups.extend(cats.iter().cloned());

    let bar = 18.0;
    let gap = 24.0;
    let group_width = bar * evaluated.len().max(1) as f64 + gap;
    let width = PLOT_LEFT + group_width * groups.len() as f64 + 10.0;
    let height = PLOT_TOP + PLOT_HEIGHT + 40.0;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    y_axis(&mut svg, width);
    let entries: Vec<(String, &str, &str)> = evaluated
        .iter()
        .enumerate()
        .map(|(i, r)| (r.model_id.clone(), PALETTE[i % PALETTE.len()], ""))
        .collect();
    legend(&mut svg, &entries);

    for (g, key) in groups.iter().enumerate() {
        let x0 = PLOT_LEFT + gap / 2.0 + g as f64 * group_width;
        for (i, r) in evaluated.iter().enumerate() {
            let rate = if g == 0 {
                Some(r.overall_pass_rate)
            } else {
                r.per_category.get(key).map(|s| s.pass_rate)
            };
            let Some(rate) = rate else { continue };
            let x = x0 + i as f64 * bar;
            let y = y_of(rate);
            let _ = writeln!(
                svg,
                r#"<rect x="{x:.1}" y="{y:.1}" width="{:.1}" height="{:.1}" fill="{}"><title>{} {}: {}</title></rect>"#,
                bar - 2.0,
                PLOT_TOP + PLOT_HEIGHT - y,
                PALETTE[i % PALETTE.len()],
                escape(&r.model_id),
                escape(key),
                pct(rate)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            x0 + (group_width - gap) / 2.0,
            PLOT_TOP + PLOT_HEIGHT + 16.0,
            escape(key)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Pass rates of one model at one training step.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow<'a> {
    pub step: i64,
    pub result: &'a SuiteResult,
}

fn series_keys(rows: &[SeriesRow<'_>]) -> Vec<String> {
    let results: Vec<&SuiteResult> = rows.iter().map(|r| r.result).collect();
    let mut ks = keys(&results, Breakdown::Category);
    for a in attribute_keys(&results) {
        ks.push(format!("[{a}]"));
    }
    ks
}

fn series_value(r: &SuiteResult, key: &str) -> Option<f64> {
    if let Some(attr) = key.strip_prefix('[').and_then(|k| k.strip_suffix(']')) {
        return r.per_attribute.as_ref()?.get(attr).map(|s| s.pass_rate);
    }
    r.per_category.get(key).map(|s| s.pass_rate)
}

pub fn series_table(rows: &[SeriesRow<'_>]) -> String {
    let ks = series_keys(rows);
    let mut header = vec![
        "Model".to_string(),
        "Step".into(),
        "Tests".into(),
        "Overall".into(),
    ];
    header.extend(ks.iter().cloned());
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            let r = row.result;
            let mut cells = vec![
                r.model_id.clone(),
                row.step.to_string(),
                r.n_tests.to_string(),
                pct(r.overall_pass_rate),
            ];
            cells.extend(
                ks.iter()
                    .map(|k| series_value(r, k).map(pct).unwrap_or_else(|| "-".into())),
            );
            cells
        })
        .collect();
    layout(&header, &body)
}

pub fn series_csv(rows: &[SeriesRow<'_>]) -> anyhow::Result<String> {
    let ks = series_keys(rows);
    let mut w = csv_writer();
    let mut header = vec![
        "model".to_string(),
        "step".into(),
        "n_tests".into(),
        "overall".into(),
    ];
    header.extend(ks.iter().cloned());
    w.write_record(&header)?;
    for row in rows {
        let r = row.result;
        let mut cells = vec![
            r.model_id.clone(),
            row.step.to_string(),
            r.n_tests.to_string(),
            r.overall_pass_rate.to_string(),
        ];
        cells.extend(ks.iter().map(|k| opt(series_value(r, k))));
        w.write_record(&cells)?;
    }
    csv_finish(w)
}

const DASHES: [&str; 4] = [
    "",
    r#" stroke-dasharray="6 3""#,
    r#" stroke-dasharray="2 2""#,
    r#" stroke-dasharray="8 2 2 2""#,
];

/// Line chart of pass rate against step: colour per breakdown key, dash
/// pattern per model.
pub fn series_chart(rows: &[SeriesRow<'_>]) -> String {
    let mut ks = vec!["Overall".to_string()];
    ks.extend(series_keys(rows));
    let models: Vec<&str> = rows
        .iter()
        .map(|r| r.result.model_id.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let (min_step, max_step) = rows.iter().fold((i64::MAX, i64::MIN), |(lo, hi), r| {
        (lo.min(r.step), hi.max(r.step))
    });
    let plot_width = 480.0;
    let width = PLOT_LEFT + plot_width + 20.0;
    let height = PLOT_TOP + PLOT_HEIGHT + 40.0;
    let x_of = |step: i64| {
        if max_step > min_step {
            PLOT_LEFT + plot_width * (step - min_step) as f64 / (max_step - min_step) as f64
        } else {
            PLOT_LEFT + plot_width / 2.0
        }
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    y_axis(&mut svg, width);

    let mut entries = Vec::new();
    for (mi, model) in models.iter().enumerate() {
        let points: Vec<&SeriesRow<'_>> = rows
            .iter()
            .filter(|r| r.result.model_id == *model)
            .collect();
        for (ki, key) in ks.iter().enumerate() {
            let color = PALETTE[ki % PALETTE.len()];
            let dash = DASHES[mi % DASHES.len()];
            let coords: Vec<String> = points
                .iter()
                .filter_map(|p| {
                    let v = if ki == 0 {
                        Some(p.result.overall_pass_rate)
                    } else {
                        series_value(p.result, key)
                    };
                    v.map(|v| format!("{:.1},{:.1}", x_of(p.step), y_of(v)))
                })
                .collect();
            if coords.is_empty() {
                continue;
            }
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#,
                coords.join(" ")
            );
            let label = if models.len() > 1 {
                format!("{model} {key}")
            } else {
                key.clone()
            };
            entries.push((label, color, dash));
        }
    }
    legend(&mut svg, &entries);

    let steps: BTreeSet<i64> = rows.iter().map(|r| r.step).collect();
    for s in steps {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{s}</text>"#,
            x_of(s),
            PLOT_TOP + PLOT_HEIGHT + 16.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}
