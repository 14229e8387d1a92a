//! Report tables: comparisons CSV and plot-ready CI segments.

use serde::Serialize;
use snapforge::analysis::Report;
use snapforge::Mode;

use crate::error::{CliError, ErrorKind, Result};

#[derive(Serialize)]
struct ReportRow<'a> {
    metric: &'a str,
    task: &'a str,
    mode_a: Mode,
    mode_b: Mode,
    status: &'static str,
    n_a: usize,
    n_b: usize,
    mean_a: Option<f64>,
    mean_b: Option<f64>,
    mean_diff: Option<f64>,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
    level: f64,
    n_resamples: usize,
    significant: Option<bool>,
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner()
        .map_err(|e| CliError::new(ErrorKind::Other, e.to_string()))
}

/// Every comparison, then every missing cell with empty statistics.
pub fn report_csv(report: &Report) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in &report.comparisons {
        w.serialize(ReportRow {
            metric: &c.metric,
            task: &c.task,
            mode_a: c.mode_a,
            mode_b: c.mode_b,
            status: "ok",
            n_a: c.n_a,
            n_b: c.n_b,
            mean_a: Some(c.mean_a),
            mean_b: Some(c.mean_b),
            mean_diff: Some(c.result.mean_diff),
            ci_low: Some(c.result.ci_low),
            ci_high: Some(c.result.ci_high),
            level: c.result.level,
            n_resamples: c.result.n_resamples,
            significant: Some(c.significant),
        })?;
    }
    for m in &report.missing {
        w.serialize(ReportRow {
            metric: &m.metric,
            task: &m.task,
            mode_a: m.mode_a,
            mode_b: m.mode_b,
            status: "missing",
            n_a: m.n_a,
            n_b: m.n_b,
            mean_a: None,
            mean_b: None,
            mean_diff: None,
            ci_low: None,
            ci_high: None,
            level: report.config.level,
            n_resamples: report.config.n_resamples,
            significant: None,
        })?;
    }
    finish(w)
}

#[derive(Serialize)]
struct PlotRow<'a> {
    row: usize,
    label: String,
    metric: &'a str,
    task: &'a str,
    estimate: f64,
    ci_low: f64,
    ci_high: f64,
    significant: bool,
}

/// One CI segment per comparison, in report order, with a row index for
/// the vertical axis of a forest plot.
pub fn plot_csv(report: &Report) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (row, c) in report.comparisons.iter().enumerate() {
        w.serialize(PlotRow {
            row,
            label: format!("{} - {}", c.mode_a, c.mode_b),
            metric: &c.metric,
            task: &c.task,
            estimate: c.result.mean_diff,
            ci_low: c.result.ci_low,
            ci_high: c.result.ci_high,
            significant: c.significant,
        })?;
    }
    finish(w)
}
