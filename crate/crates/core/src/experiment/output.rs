use std::fs;
use std::path::Path;

use serde::Serialize;

use super::batch::BatchReport;
use super::compare::CompareReport;
use super::curves::Curves;
use super::ExperimentError;
use crate::fairness::to_minutes;

pub const BATCH_FILES: [&str; 5] = ["trials.csv", "summary.json", "exceedance_F.csv", "exceedance_jains.csv", "traces.csv"];
pub const COMPARE_FILES: [&str; 2] = ["smartpark_trials.csv", "smartpark_summary.json"];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write(dir: &Path, name: &str, contents: &[u8]) -> Result<(), ExperimentError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| ExperimentError::Io { path: path.display().to_string(), source })
}

fn csv_bytes(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| ExperimentError::Io { path: "<buffer>".into(), source: e.into_error() })
}

fn curves_csv(curves: &Curves, first: &str) -> Result<Vec<u8>, ExperimentError> {
    let header: Vec<String> = std::iter::once(first.to_string()).chain(curves.series.iter().map(|(n, _)| n.clone())).collect();
    let rows = curves.grid.iter().enumerate().map(|(i, g)| {
        std::iter::once(g.to_string()).chain(curves.series.iter().map(|(_, p)| p[i].to_string())).collect()
    });
    csv_bytes(&header, rows)
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text.into_bytes()
}

#[derive(Serialize)]
struct Document<'a, C, S> {
    config: &'a C,
    summary: &'a S,
}

/// Per-trial rows as CSV; the runtime column only appears with timings on.
pub fn trials_csv(report: &BatchReport) -> Result<Vec<u8>, ExperimentError> {
    let timings = report.config.timings;
    let mut header: Vec<String> =
        ["trial", "seed", "method", "status", "F_minutes", "H_minutes", "jains", "iterations", "feasible"]
            .map(String::from)
            .to_vec();
    if timings {
        header.push("runtime_ms".into());
    }
    header.push("error".into());
    let rows = report.rows.iter().map(|r| {
        let mut row = vec![
            r.trial.to_string(),
            r.seed.to_string(),
            r.method.name().to_string(),
            match r.status {
                super::RowStatus::Ok => "ok".into(),
                super::RowStatus::Failed => "failed".into(),
            },
            opt(r.f_minutes),
            opt(r.h_minutes),
            opt(r.jains),
            opt(r.iterations),
            opt(r.feasible),
        ];
        if timings {
            row.push(opt(r.runtime_ms));
        }
        row.push(r.error.clone().unwrap_or_default());
        row
    });
    csv_bytes(&header, rows)
}

pub fn traces_csv(report: &BatchReport) -> Result<Vec<u8>, ExperimentError> {
    let header = ["trial", "iter", "H_minutes", "F_minutes", "S_size", "subproblem_cost"].map(String::from);
    let rows = report.traces.iter().flat_map(|(t, trace)| {
        trace.records().map(move |r| {
            vec![
                t.to_string(),
                r.iter.to_string(),
                to_minutes(r.mean_walk).to_string(),
                to_minutes(r.mean_envy).to_string(),
                r.frozen.to_string(),
                to_minutes(r.subproblem_cost).to_string(),
            ]
        })
    });
    csv_bytes(&header, rows)
}

/// Writes the batch exports into `dir`, creating it if needed.
pub fn write_batch(report: &BatchReport, dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(|source| ExperimentError::Io { path: dir.display().to_string(), source })?;
    write(dir, "trials.csv", &trials_csv(report)?)?;
    write(dir, "summary.json", &json(&Document { config: &report.config, summary: &report.summary }))?;
    write(dir, "exceedance_F.csv", &curves_csv(&report.summary.exceedance_f_minutes, "gamma_minutes")?)?;
    write(dir, "exceedance_jains.csv", &curves_csv(&report.summary.exceedance_jains, "gamma")?)?;
    write(dir, "traces.csv", &traces_csv(report)?)
}

pub fn write_compare(report: &CompareReport, dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(|source| ExperimentError::Io { path: dir.display().to_string(), source })?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &report.rows {
        w.serialize(row)?;
    }
    if report.rows.is_empty() {
        w.write_record([
            "trial",
            "seed",
            "n_drivers",
            "utility_mean_envy",
            "fair_mean_envy",
            "utility_jains",
            "fair_jains",
            "utility_unassigned",
            "fair_unassigned",
            "mean_envy_improvement_pct",
            "jains_improvement_pct",
            "cost_increases",
            "reservation_overflows",
            "error",
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| ExperimentError::Io { path: "<buffer>".into(), source: e.into_error() })?;
    write(dir, "smartpark_trials.csv", &bytes)?;
    write(dir, "smartpark_summary.json", &json(&Document { config: &report.config, summary: &report.summary }))
}
