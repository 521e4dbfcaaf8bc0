//! CSV and JSON writers. Every CSV starts with a `#` comment line naming
//! the schema and its version.

use crate::bench::BenchTable;
use crate::error::{EvalError, Result};
use crate::evaluate::{EvaluationReport, REPORT_VERSION};
use serde::Serialize;
use std::fmt::Display;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn opt<T: Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_text(schema: &str, header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 fields");
    format!("# nodelab {schema} v{REPORT_VERSION}\n{body}")
}

pub fn records_csv(report: &EvaluationReport) -> String {
    let rows = report
        .records
        .iter()
        .map(|r| {
            vec![
                r.instance.clone(),
                r.nodes.to_string(),
                r.edges.to_string(),
                r.algorithm.clone(),
                r.cost.to_string(),
                r.feasible.to_string(),
                opt(r.reference),
                opt(r.reference_kind),
                opt(r.ratio),
                opt(r.optimal),
                r.win.to_string(),
                r.error.clone().unwrap_or_default(),
                r.wall_time.to_string(),
            ]
        })
        .collect();
    csv_text(
        "evaluation-records",
        &[
            "instance", "nodes", "edges", "algorithm", "cost", "feasible", "reference", "reference_kind", "ratio",
            "optimal", "win", "error", "wall_time",
        ],
        rows,
    )
}

pub fn summary_csv(report: &EvaluationReport) -> String {
    let rows = report
        .summary
        .iter()
        .map(|s| {
            vec![
                s.algorithm.clone(),
                s.instances.to_string(),
                s.feasible.to_string(),
                s.failures.to_string(),
                opt(s.mean_cost),
                opt(s.mean_ratio),
                s.wins.to_string(),
                opt(s.optimal),
            ]
        })
        .collect();
    csv_text(
        "evaluation-summary",
        &["algorithm", "instances", "feasible", "failures", "mean_cost", "mean_ratio", "wins", "optimal"],
        rows,
    )
}

pub fn bench_csv(table: &BenchTable) -> String {
    let slope = |m| table.slopes.iter().find(|s| s.mode == m).map(|s| s.slope);
    let rows = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.mode.to_string(),
                r.nodes.to_string(),
                r.edges.to_string(),
                r.repeats.to_string(),
                r.mean_seconds.to_string(),
                r.arithmetic.to_string(),
                r.comparisons.to_string(),
                opt(slope(r.mode)),
            ]
        })
        .collect();
    csv_text(
        "bench",
        &["mode", "nodes", "edges", "repeats", "mean_seconds", "arithmetic", "comparisons", "slope"],
        rows,
    )
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| EvalError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| EvalError::io(path, e))
}

/// Writes the report as `report.json`, or `records.csv` plus
/// `summary.csv`, into `dir`; returns the files written.
pub fn write_report(report: &EvaluationReport, dir: &Path, format: Format) -> Result<Vec<std::path::PathBuf>> {
    let files = match format {
        Format::Json => vec![(dir.join("report.json"), to_json(report))],
        Format::Csv => vec![
            (dir.join("records.csv"), records_csv(report)),
            (dir.join("summary.csv"), summary_csv(report)),
        ],
    };
    for (p, text) in &files {
        write_file(p, text)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}
