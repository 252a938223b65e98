//! Result files: sweep CSV, score CSV, plot-data series and the JSON summary.

use super::CliError;
use crate::harness::{ScoreRow, SweepRow};
use crate::protocol::SchemeKind;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SWEEP_COLUMNS: [&str; 15] = [
    "state_id",
    "x",
    "y",
    "z",
    "scheme",
    "engine",
    "n",
    "eps1",
    "eps2",
    "a",
    "runs",
    "mean_fidelity",
    "std_fidelity",
    "degenerate_runs",
    "seed",
];

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| io_err(path, e))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| io_err(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(SWEEP_COLUMNS).map_err(|e| io_err(path, e))?;
    for r in rows {
        let record = [
            r.state_id.clone(),
            r.x.to_string(),
            r.y.to_string(),
            r.z.to_string(),
            r.scheme.to_string(),
            r.engine.to_string(),
            r.n.to_string(),
            r.eps1.to_string(),
            r.eps2.to_string(),
            r.a.to_string(),
            r.runs.to_string(),
            r.mean_fidelity.to_string(),
            r.std_fidelity.to_string(),
            r.degenerate_runs.to_string(),
            r.seed.to_string(),
        ];
        w.write_record(&record).map_err(|e| io_err(path, e))?;
    }
    finish(w, path)
}

pub fn write_score_csv(path: &Path, rows: &[ScoreRow]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["n", "a", "eps", "wins", "total", "fraction"])
        .map_err(|e| io_err(path, e))?;
    for r in rows {
        let eps = r.eps.map(|e| e.to_string()).unwrap_or_else(|| "best".into());
        let record = [
            r.n.to_string(),
            r.discard_a.to_string(),
            eps,
            r.wins.to_string(),
            r.total.to_string(),
            r.fraction().to_string(),
        ];
        w.write_record(&record).map_err(|e| io_err(path, e))?;
    }
    finish(w, path)
}

/// One point of a plotted series, averaged over all states of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub series: String,
    pub eps: f64,
    pub mean_fidelity: f64,
    pub std_fidelity: f64,
}

/// f̄ and σ against ε for each discard value, plus the flat projective
/// series, for ensemble size `n`. Values are averaged over states.
pub fn plot_series(rows: &[SweepRow], n: u64, eps_grid: &[f64]) -> Vec<SeriesPoint> {
    // keyed by (discard bits, eps index) so the output order is stable;
    // values are (label, eps, sum of means, sum of stds, count)
    type Acc = (String, f64, f64, f64, usize);
    let mut acc: BTreeMap<(u64, usize), Acc> = BTreeMap::new();
    let mut baseline = (0.0, 0.0, 0usize);
    for r in rows.iter().filter(|r| r.n == n) {
        if matches!(r.scheme, SchemeKind::ProjectiveFull | SchemeKind::ProjectiveDisk) {
            baseline.0 += r.mean_fidelity;
            baseline.1 += r.std_fidelity;
            baseline.2 += 1;
            continue;
        }
        let Some(ei) = eps_grid.iter().position(|&e| e == r.eps1) else { continue };
        let entry = acc
            .entry((r.a.to_bits(), ei))
            .or_insert_with(|| (format!("a={}", r.a), r.eps1, 0.0, 0.0, 0));
        entry.2 += r.mean_fidelity;
        entry.3 += r.std_fidelity;
        entry.4 += 1;
    }
    let mut out: Vec<SeriesPoint> = acc
        .into_values()
        .map(|(series, eps, m, s, k)| SeriesPoint {
            series,
            eps,
            mean_fidelity: m / k as f64,
            std_fidelity: s / k as f64,
        })
        .collect();
    if baseline.2 > 0 {
        let k = baseline.2 as f64;
        for &eps in eps_grid {
            out.push(SeriesPoint {
                series: "projective".into(),
                eps,
                mean_fidelity: baseline.0 / k,
                std_fidelity: baseline.1 / k,
            });
        }
    }
    out
}

pub fn write_plot_csv(path: &Path, points: &[SeriesPoint]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["series", "eps", "mean_fidelity", "std_fidelity"])
        .map_err(|e| io_err(path, e))?;
    for p in points {
        w.write_record([
            p.series.clone(),
            p.eps.to_string(),
            p.mean_fidelity.to_string(),
            p.std_fidelity.to_string(),
        ])
        .map_err(|e| io_err(path, e))?;
    }
    finish(w, path)
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary<T: Serialize> {
    pub schema_version: u32,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub master_seed: u64,
    pub config_hash: String,
    pub engine: String,
    pub estimator: String,
    pub std_kind: &'static str,
    pub columns: [&'static str; 15],
    pub rows: usize,
    pub files: Vec<String>,
    pub results: T,
}

impl<T: Serialize> Summary<T> {
    pub fn new(command: &'static str, master_seed: u64, config_hash: String, engine: String, estimator: String, rows: usize, results: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: "weaktomo",
            tool_version: TOOL_VERSION,
            command,
            master_seed,
            config_hash,
            engine,
            estimator,
            std_kind: "population",
            columns: SWEEP_COLUMNS,
            rows,
            files: Vec::new(),
            results,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn file_name(path: &Path) -> String {
    path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn join(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
