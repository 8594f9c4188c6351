//! Report files: CSV (run rows then aggregate rows), JSON, grouped-bar SVG.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::io_err;
use crate::experiment::{aggregate, Aggregate, ExperimentReport};
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown report format `{other}` (csv, json, svg)")),
        }
    }
}

/// One CSV line. `kind` is `run` or `aggregate`; columns that do not apply
/// to a kind are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub kind: String,
    pub rule: String,
    pub engine: String,
    pub profile: String,
    pub run: Option<usize>,
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub f1_std: Option<f64>,
    pub iterations: Option<f64>,
    pub outcome: Option<String>,
    pub wall_clock_ms: Option<f64>,
}

pub fn csv_rows(report: &ExperimentReport) -> Vec<CsvRow> {
    let runs = report.runs.iter().map(|r| CsvRow {
        kind: "run".into(),
        rule: r.rule.clone(),
        engine: r.engine.clone(),
        profile: r.profile.clone(),
        run: Some(r.run),
        seed: Some(r.seed),
        runs: None,
        precision: r.precision,
        recall: r.recall,
        f1: r.f1,
        f1_std: None,
        iterations: r.iterations.map(|i| i as f64),
        outcome: r.outcome.clone(),
        wall_clock_ms: r.wall_clock_ms,
    });
    let aggs = report.aggregates.iter().map(|a| CsvRow {
        kind: "aggregate".into(),
        rule: a.rule.clone(),
        engine: a.engine.clone(),
        profile: a.profile.clone(),
        run: None,
        seed: None,
        runs: Some(a.runs),
        precision: a.precision_mean,
        recall: a.recall_mean,
        f1: a.f1_mean,
        f1_std: Some(a.f1_std),
        iterations: a.iterations_mean,
        outcome: None,
        wall_clock_ms: a.wall_clock_ms_mean,
    });
    runs.chain(aggs).collect()
}

pub fn to_csv(report: &ExperimentReport) -> Result<String, HarnessError> {
    let csv_err = |source| HarnessError::Csv { path: PathBuf::from("<report>"), source };
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in csv_rows(report) {
        w.serialize(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| csv_err(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Read back the rows of a CSV report.
pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>, HarnessError> {
    let csv_err = |source| HarnessError::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().collect::<Result<_, _>>().map_err(csv_err)
}

pub fn to_json(report: &ExperimentReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

pub fn read_json(path: &Path) -> Result<ExperimentReport, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut report: ExperimentReport =
        serde_json::from_str(&text).map_err(|source| HarnessError::Json { path: path.to_path_buf(), source })?;
    // aggregates are derived data; recompute rather than trust the file
    report.aggregates = aggregate(&report.runs);
    Ok(report)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const PALETTE: [&str; 8] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f"];

/// Grouped bars for one rule: a group per engine, a bar per profile,
/// height = mean F1, whisker = one std.
pub fn svg_for_rule(report: &ExperimentReport, rule: &str) -> String {
    let aggs: Vec<&Aggregate> = report.aggregates.iter().filter(|a| a.rule == rule).collect();
    let mut engines: Vec<&str> = Vec::new();
    let mut profiles: Vec<&str> = Vec::new();
    for a in &aggs {
        if !engines.contains(&a.engine.as_str()) {
            engines.push(&a.engine);
        }
        if !profiles.contains(&a.profile.as_str()) {
            profiles.push(&a.profile);
        }
    }
    let (bar, gap, left, top, plot_h) = (22.0, 24.0, 48.0, 36.0, 200.0);
    let group_w = bar * profiles.len() as f64 + gap;
    let width = left + group_w * engines.len() as f64 + 20.0;
    let legend_y = top + plot_h + 44.0;
    let height = legend_y + 18.0 * profiles.len() as f64 + 8.0;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<title>F1 by engine and profile: {}</title>"#, xml_escape(rule));
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{left}" y="20" font-size="13">{}</text>"#, xml_escape(rule));
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        let y = top + plot_h * (1.0 - v);
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">{v:.2}</text>"##,
            width - 20.0,
            left - 6.0,
            y + 4.0
        );
    }
    for (ei, engine) in engines.iter().enumerate() {
        let gx = left + gap / 2.0 + group_w * ei as f64;
        for (pi, profile) in profiles.iter().enumerate() {
            let Some(a) = aggs.iter().find(|a| a.engine == *engine && a.profile == *profile) else {
                continue;
            };
            let x = gx + bar * pi as f64;
            let h = plot_h * a.f1_mean.clamp(0.0, 1.0);
            let y = top + plot_h - h;
            let _ = writeln!(
                s,
                r#"<rect x="{x}" y="{y}" width="{}" height="{h}" fill="{}"><title>{} / {}: {:.3} ± {:.3}</title></rect>"#,
                bar - 2.0,
                PALETTE[pi % PALETTE.len()],
                xml_escape(engine),
                xml_escape(profile),
                a.f1_mean,
                a.f1_std
            );
            let cx = x + (bar - 2.0) / 2.0;
            let lo = top + plot_h * (1.0 - (a.f1_mean - a.f1_std).clamp(0.0, 1.0));
            let hi = top + plot_h * (1.0 - (a.f1_mean + a.f1_std).clamp(0.0, 1.0));
            let _ = writeln!(s, r#"<line x1="{cx}" y1="{lo}" x2="{cx}" y2="{hi}" stroke="black"/>"#);
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            gx + bar * profiles.len() as f64 / 2.0,
            top + plot_h + 16.0,
            xml_escape(engine)
        );
    }
    for (pi, profile) in profiles.iter().enumerate() {
        let y = legend_y + 18.0 * pi as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{left}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            y - 10.0,
            PALETTE[pi % PALETTE.len()],
            left + 18.0,
            y,
            xml_escape(profile)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// File-name-safe version of a rule name.
pub fn slug(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Write the requested formats into `dir`; returns the files written.
pub fn emit_report(report: &ExperimentReport, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<(), HarnessError> {
        let path = dir.join(name);
        fs::write(&path, body).map_err(io_err(&path))?;
        written.push(path);
        Ok(())
    };
    for f in formats {
        match f {
            Format::Csv => put("report.csv".into(), to_csv(report)?)?,
            Format::Json => put("report.json".into(), to_json(report))?,
            Format::Svg => {
                for rule in &report.rules {
                    put(format!("{}.svg", slug(&rule.name)), svg_for_rule(report, &rule.name))?;
                }
            }
        }
    }
    Ok(written)
}

/// Plain-text table of the aggregates.
pub fn summary_table(report: &ExperimentReport) -> String {
    let mut s = format!("{:<44} {:<8} {:<10} {:>14} {:>12}\n", "rule", "engine", "profile", "F1", "iterations");
    for a in &report.aggregates {
        let it = a.iterations_mean.map(|i| format!("{i:.0}")).unwrap_or_default();
        let _ = writeln!(s, "{:<44} {:<8} {:<10} {:>6.3} ± {:.3} {:>12}", a.rule, a.engine, a.profile, a.f1_mean, a.f1_std, it);
    }
    s
}
