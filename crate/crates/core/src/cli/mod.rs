//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 validation failure, 3 I/O error.

pub mod config;
pub mod output;

use crate::bloch::states;
use crate::estimator::WeakEstimator;
use crate::harness::{self, compare_to_baseline, EpsComparison, ScoreMode, ScoreRow, SweepSpec};
use crate::protocol::{EngineKind, SchemeKind};
use crate::validate::{self, ValidateOptions};
use clap::{Args, Parser, Subcommand};
use config::{ExperimentConfig, GridSpec, RangeSpec, StatesSource};
use serde::Serialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "weaktomo", version, about = "Weak-measurement qubit tomography experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// JSON experiment config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub engine: Option<EngineKind>,
    /// Weak-stage estimator: conditional (default) or calibrated.
    #[arg(long, global = true)]
    pub estimator: Option<WeakEstimator>,
    /// Worker threads; output does not depend on this.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Runs per cell (overrides the config).
    #[arg(long, global = true)]
    pub runs: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ε sweep for a built-in state against the projective baseline.
    Demo {
        /// rho1 or rho2.
        state: String,
        /// Discard half-widths, comma separated. Defaults: rho1 0; rho2 0,0.2,0.4,0.6,0.8.
        #[arg(long, value_delimiter = ',')]
        discard: Option<Vec<f64>>,
        #[arg(long, default_value_t = 30)]
        n: u64,
    },
    /// Full parameter sweep from a config file.
    Sweep,
    /// Win counts against the projective baseline from a config file.
    Score {
        /// Score every ε separately instead of the best ε per state.
        #[arg(long)]
        per_eps: bool,
    },
    /// Disk (y = 0) experiment; uses the config if given, else built-in defaults.
    Disk {
        /// Number of random disk states when no config is given.
        #[arg(long, default_value_t = 500)]
        states: usize,
    },
    /// Runs the self-check suite.
    Validate {
        #[arg(long, hide = true, default_value_t = 0.0)]
        inject_erf_error: f64,
    },
}

/// Entry point used by the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("weaktomo: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Demo { state, discard, n } => cmd_demo(g, state, discard.as_deref(), *n),
        Command::Sweep => cmd_sweep(g),
        Command::Score { per_eps } => {
            let mode = if *per_eps { ScoreMode::PerEps } else { ScoreMode::BestEps };
            cmd_score(g, "score", require_config(g)?, Some(mode))
        }
        Command::Disk { states } => {
            let cfg = match &g.config {
                Some(path) => ExperimentConfig::load(path)?,
                None => default_disk_config(*states),
            };
            if cfg.scheme != SchemeKind::WeakDisk {
                return Err(CliError::Config("disk requires \"scheme\": \"weak_disk\"".into()));
            }
            cmd_score(g, "disk", cfg, None)
        }
        Command::Validate { inject_erf_error } => cmd_validate(g, *inject_erf_error),
    }
}

fn require_config(g: &GlobalOpts) -> Result<ExperimentConfig, CliError> {
    let path = g.config.as_ref().ok_or_else(|| CliError::Usage("--config PATH is required".into()))?;
    ExperimentConfig::load(path)
}

fn default_disk_config(states: usize) -> ExperimentConfig {
    ExperimentConfig {
        scheme: SchemeKind::WeakDisk,
        engine: EngineKind::default(),
        estimator: WeakEstimator::default(),
        states: StatesSource::Disk(states),
        ensemble_sizes: vec![30, 60, 90],
        eps: GridSpec::Range(RangeSpec { start: 0.1, stop: 2.0, step: 0.1 }),
        discard: GridSpec::Values(SweepSpec::default_a_grid()),
        runs: 1000,
        seed: 0,
        workers: None,
        score_mode: ScoreMode::BestEps,
        plot_data: true,
        out: None,
    }
}

/// Applies command-line overrides to a loaded config.
fn apply_overrides(mut cfg: ExperimentConfig, g: &GlobalOpts) -> ExperimentConfig {
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(engine) = g.engine {
        cfg.engine = engine;
    }
    if let Some(estimator) = g.estimator {
        cfg.estimator = estimator;
    }
    if let Some(runs) = g.runs {
        cfg.runs = runs;
    }
    if let Some(workers) = g.workers {
        cfg.workers = Some(workers);
    }
    if let Some(out) = &g.out {
        cfg.out = Some(out.clone());
    }
    cfg
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from("results"))
}

fn warn_large_eps(spec: &SweepSpec) {
    if let Some(max) = spec.eps_grid.iter().copied().reduce(f64::max) {
        if max > 2.0 {
            eprintln!(
                "weaktomo: warning: eps up to {max} amplifies estimator variance by e^eps; results beyond eps = 2 are statistically weak"
            );
        }
    }
}

fn prepare(cfg: &ExperimentConfig) -> Result<(SweepSpec, PathBuf), CliError> {
    if cfg.runs == 0 {
        return Err(CliError::Config("runs must be at least 1".into()));
    }
    let spec = cfg
        .to_spec(cfg.workers.unwrap_or_else(default_workers))
        .map_err(CliError::Config)?;
    warn_large_eps(&spec);
    let dir = out_dir(cfg);
    output::ensure_dir(&dir)?;
    Ok((spec, dir))
}

fn write_plots(dir: &Path, spec: &SweepSpec, rows: &[harness::SweepRow], prefix: &str) -> Result<Vec<String>, CliError> {
    let mut files = Vec::new();
    for &n in &spec.n_list {
        let path = dir.join(format!("{prefix}_n{n}.csv"));
        output::write_plot_csv(&path, &output::plot_series(rows, n, &spec.eps_grid))?;
        files.push(output::file_name(&path));
    }
    Ok(files)
}

#[derive(Debug, Serialize)]
struct DemoCurve {
    discard_a: f64,
    baseline_mean: f64,
    baseline_std: f64,
    points: Vec<EpsComparison>,
    /// ε values where the weak mean exceeds the baseline by more than 3 standard errors.
    significant_eps: Vec<f64>,
}

fn cmd_demo(g: &GlobalOpts, name: &str, discard: Option<&[f64]>, n: u64) -> Result<(), CliError> {
    let state = states::by_name(name)
        .ok_or_else(|| CliError::Usage(format!("unknown demo state '{name}' (expected rho1|rho2)")))?;
    let a_grid = match discard {
        Some(a) => a.to_vec(),
        None if name == "rho1" => vec![0.0],
        None => SweepSpec::default_a_grid(),
    };
    let cfg = ExperimentConfig {
        scheme: SchemeKind::WeakFull,
        engine: EngineKind::default(),
        estimator: WeakEstimator::default(),
        states: StatesSource::Explicit(vec![config::ExplicitState {
            id: name.to_string(),
            x: state.x,
            y: state.y,
            z: state.z,
        }]),
        ensemble_sizes: vec![n],
        eps: GridSpec::Range(RangeSpec { start: 0.1, stop: 2.0, step: 0.1 }),
        discard: GridSpec::Values(a_grid),
        runs: 10_000,
        seed: 0,
        workers: None,
        score_mode: ScoreMode::BestEps,
        plot_data: true,
        out: None,
    };
    let cfg = apply_overrides(cfg, g);
    let (spec, dir) = prepare(&cfg)?;
    let rows = harness::sweep(&spec).map_err(|e| CliError::Config(e.to_string()))?;

    let sweep_path = dir.join("demo.csv");
    output::write_sweep_csv(&sweep_path, &rows)?;
    let mut files = vec![output::file_name(&sweep_path)];
    files.extend(write_plots(&dir, &spec, &rows, "demo_plot")?);

    let baseline = &rows[0];
    let mut curves = Vec::new();
    println!("{name}: projective baseline f = {:.4} (sd {:.4})", baseline.mean_fidelity, baseline.std_fidelity);
    for &a in &spec.a_grid {
        let weak: Vec<_> = rows[1..].iter().filter(|r| r.a == a).cloned().collect();
        let points = compare_to_baseline(&weak, baseline);
        let significant_eps: Vec<f64> = points.iter().filter(|p| p.beats(3.0)).map(|p| p.eps).collect();
        println!(
            "  a = {a}: best weak f = {:.4}; beats baseline (3 SE) at eps {:?}",
            points.iter().map(|p| p.weak_mean).fold(f64::NEG_INFINITY, f64::max),
            significant_eps
        );
        curves.push(DemoCurve {
            discard_a: a,
            baseline_mean: baseline.mean_fidelity,
            baseline_std: baseline.std_fidelity,
            points,
            significant_eps,
        });
    }

    let summary_path = dir.join("summary.json");
    files.push(output::file_name(&summary_path));
    let mut summary = output::Summary::new(
        "demo",
        cfg.seed,
        cfg.hash(),
        cfg.engine.to_string(),
        cfg.estimator.to_string(),
        rows.len(),
        curves,
    );
    summary.files = files;
    output::write_json(&summary_path, &summary)
}

fn cmd_sweep(g: &GlobalOpts) -> Result<(), CliError> {
    let cfg = apply_overrides(require_config(g)?, g);
    let (spec, dir) = prepare(&cfg)?;
    let rows = harness::sweep(&spec).map_err(|e| CliError::Config(e.to_string()))?;
    let sweep_path = dir.join("sweep.csv");
    output::write_sweep_csv(&sweep_path, &rows)?;
    let mut files = vec![output::file_name(&sweep_path)];
    if cfg.plot_data {
        files.extend(write_plots(&dir, &spec, &rows, "plot")?);
    }
    let summary_path = dir.join("summary.json");
    files.push(output::file_name(&summary_path));
    let mut summary = output::Summary::new(
        "sweep",
        cfg.seed,
        cfg.hash(),
        cfg.engine.to_string(),
        cfg.estimator.to_string(),
        rows.len(),
        serde_json::json!({ "states": spec.states.len(), "ensemble_sizes": spec.n_list }),
    );
    summary.files = files;
    output::write_json(&summary_path, &summary)?;
    println!("wrote {} rows to {}", rows.len(), dir.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct ScoreSummary {
    mode: ScoreMode,
    scores: Vec<ScoreEntry>,
    /// Smallest discard value whose win fraction exceeds 0.5, per ensemble size.
    thresholds: Vec<Threshold>,
}

#[derive(Debug, Serialize)]
struct ScoreEntry {
    n: u64,
    discard_a: f64,
    eps: Option<f64>,
    wins: u64,
    total: u64,
    fraction: f64,
}

#[derive(Debug, Serialize)]
struct Threshold {
    n: u64,
    discard_a: Option<f64>,
}

fn cmd_score(
    g: &GlobalOpts,
    command: &'static str,
    cfg: ExperimentConfig,
    mode: Option<ScoreMode>,
) -> Result<(), CliError> {
    let mut cfg = apply_overrides(cfg, g);
    if let Some(mode) = mode {
        if mode == ScoreMode::PerEps {
            cfg.score_mode = mode;
        }
    }
    let (spec, dir) = prepare(&cfg)?;
    let (scores, rows) = harness::score(&spec, cfg.score_mode).map_err(|e| CliError::Config(e.to_string()))?;

    let sweep_path = dir.join(format!("{command}_sweep.csv"));
    output::write_sweep_csv(&sweep_path, &rows)?;
    let score_path = dir.join(format!("{command}.csv"));
    output::write_score_csv(&score_path, &scores)?;
    let mut files = vec![output::file_name(&sweep_path), output::file_name(&score_path)];
    if cfg.plot_data {
        files.extend(write_plots(&dir, &spec, &rows, &format!("{command}_plot"))?);
    }

    let thresholds: Vec<Threshold> = spec
        .n_list
        .iter()
        .map(|&n| Threshold { n, discard_a: harness::threshold_discard(&scores, n) })
        .collect();
    print_scores(&scores, &thresholds);

    let summary_path = dir.join("summary.json");
    files.push(output::file_name(&summary_path));
    let results = ScoreSummary {
        mode: cfg.score_mode,
        scores: scores.iter().map(score_entry).collect(),
        thresholds,
    };
    let mut summary = output::Summary::new(
        command,
        cfg.seed,
        cfg.hash(),
        cfg.engine.to_string(),
        cfg.estimator.to_string(),
        rows.len(),
        results,
    );
    summary.files = files;
    output::write_json(&summary_path, &summary)
}

fn score_entry(r: &ScoreRow) -> ScoreEntry {
    ScoreEntry { n: r.n, discard_a: r.discard_a, eps: r.eps, wins: r.wins, total: r.total, fraction: r.fraction() }
}

fn print_scores(scores: &[ScoreRow], thresholds: &[Threshold]) {
    for r in scores.iter().filter(|r| r.eps.is_none()) {
        println!("N = {:>3}  a = {:<4} wins {:>5}/{:<5} ({:.3})", r.n, r.discard_a, r.wins, r.total, r.fraction());
    }
    for t in thresholds {
        match t.discard_a {
            Some(a) => println!("N = {}: win fraction first exceeds 0.5 at a = {a}", t.n),
            None => println!("N = {}: win fraction never exceeds 0.5", t.n),
        }
    }
}

fn cmd_validate(g: &GlobalOpts, erf_offset: f64) -> Result<(), CliError> {
    let opts = ValidateOptions { seed: g.seed.unwrap_or(ValidateOptions::default().seed), erf_offset };
    let report = validate::run(&opts);
    let json = serde_json::to_string_pretty(&report).expect("report serialises");
    println!("{json}");
    if let Some(dir) = &g.out {
        output::ensure_dir(dir)?;
        output::write_json(&dir.join("validate.json"), &report)?;
    }
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<String> = report
            .failed()
            .map(|c| format!("{} (deviation {:.3e} > {:.3e})", c.name, c.deviation, c.tolerance))
            .collect();
        Err(CliError::Validation(failed.join(", ")))
    }
}
