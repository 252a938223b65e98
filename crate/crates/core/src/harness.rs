//! Monte Carlo experiment runner: random states, per-cell fidelity
//! statistics, parameter sweeps and win/loss scoring.
//!
//! Every cell of a sweep draws its random stream from a seed derived from the
//! master seed and the cell's coordinates, and every run within a cell uses its
//! own ChaCha stream. Results therefore do not depend on evaluation order or
//! on the number of worker threads.

use crate::bloch::{fidelity, BlochVector};
use crate::estimator::WeakEstimator;
use crate::protocol::{run_scheme, ConfigError, EngineKind, SchemeConfig, SchemeKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("state list is empty")]
    NoStates,
    #[error("{0} grid is empty")]
    EmptyGrid(&'static str),
    #[error("state '{id}': {source}")]
    Config {
        id: String,
        #[source]
        source: ConfigError,
    },
    #[error("{0} is not a weak scheme")]
    NotWeak(SchemeKind),
    #[error("could not build worker pool: {0}")]
    Pool(String),
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Folds a list of coordinates into a 64-bit seed.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x5eed_u64, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Random stream for run `run_index` of a cell seeded with `seed`.
pub fn run_stream(seed: u64, run_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index);
    rng
}

/// Uniform over the closed unit ball.
pub fn random_ball_state<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    let cos_theta: f64 = rng.random_range(-1.0..=1.0);
    let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
    let phi = rng.random_range(0.0..2.0 * PI);
    let r = rng.random::<f64>().cbrt();
    BlochVector::new(r * sin_theta * phi.cos(), r * sin_theta * phi.sin(), r * cos_theta)
}

/// Uniform over the unit disk y = 0.
pub fn random_disk_state<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    let phi = rng.random_range(0.0..2.0 * PI);
    let r = rng.random::<f64>().sqrt();
    BlochVector::new(r * phi.cos(), 0.0, r * phi.sin())
}

/// A state with a stable identifier for output rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledState {
    pub id: String,
    pub state: BlochVector,
}

impl LabeledState {
    pub fn new(id: impl Into<String>, state: BlochVector) -> Self {
        Self { id: id.into(), state }
    }
}

const BALL_TAG: u64 = 0xba11;
const DISK_TAG: u64 = 0xd15c;

/// `count` uniform ball states drawn from a stream derived from `seed`.
pub fn ball_states(count: usize, seed: u64) -> Vec<LabeledState> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, BALL_TAG]));
    (0..count)
        .map(|i| LabeledState::new(format!("ball-{i}"), random_ball_state(&mut rng)))
        .collect()
}

/// `count` uniform disk states drawn from a stream derived from `seed`.
pub fn disk_states(count: usize, seed: u64) -> Vec<LabeledState> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, DISK_TAG]));
    (0..count)
        .map(|i| LabeledState::new(format!("disk-{i}"), random_disk_state(&mut rng)))
        .collect()
}

/// Fidelity statistics over the runs of one cell. The spread is the
/// population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunStatistics {
    pub mean_fidelity: f64,
    pub std_fidelity: f64,
    pub runs: u64,
    pub degenerate_runs: u64,
}

impl RunStatistics {
    /// Standard error of the mean fidelity.
    pub fn standard_error(&self) -> f64 {
        self.std_fidelity / (self.runs as f64).sqrt()
    }
}

/// Per-run fidelities of a cell, in run order, plus the degenerate count.
pub fn run_fidelities(state: BlochVector, cfg: &SchemeConfig) -> (Vec<f64>, u64) {
    let mut degenerate = 0;
    let fids = (0..cfg.runs)
        .map(|i| {
            let mut rng = run_stream(cfg.seed, i);
            let est = run_scheme(state, cfg, &mut rng);
            if est.degenerate {
                degenerate += 1;
            }
            fidelity(state, est.value)
        })
        .collect();
    (fids, degenerate)
}

/// Runs `cfg.runs` independent repetitions of the scheme on `state`.
pub fn monte_carlo(state: BlochVector, cfg: &SchemeConfig) -> Result<RunStatistics, ConfigError> {
    cfg.validate_for(state)?;
    let (fids, degenerate_runs) = run_fidelities(state, cfg);
    let n = fids.len() as f64;
    let mean = fids.iter().sum::<f64>() / n;
    let var = fids.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / n;
    Ok(RunStatistics {
        mean_fidelity: mean,
        std_fidelity: var.sqrt(),
        runs: cfg.runs,
        degenerate_runs,
    })
}

/// Exact mean and variance of the fidelity of the projective scheme that
/// splits `n` copies into `parts` groups, one per listed component.
pub fn projective_fidelity_moments(components: &[f64], n: u64) -> (f64, f64) {
    let m = (n / components.len() as u64) as f64;
    let mut mean = 1.0;
    let mut var = 0.0;
    for &c in components {
        let p = 0.5 * (1.0 + c);
        let pq = p * (1.0 - p);
        // error e = c − ĉ = −2(K − mp)/m with K ~ Binomial(m, p)
        let e2 = 4.0 * pq / m;
        let mu4 = m * pq * (1.0 + 3.0 * (m - 2.0) * pq);
        let e4 = 16.0 * mu4 / m.powi(4);
        mean -= e2;
        var += e4 - e2 * e2;
    }
    (mean, var)
}

/// One evaluated cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub state_id: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub scheme: SchemeKind,
    pub engine: EngineKind,
    pub n: u64,
    pub eps1: f64,
    pub eps2: f64,
    pub a: f64,
    pub runs: u64,
    pub mean_fidelity: f64,
    pub std_fidelity: f64,
    pub degenerate_runs: u64,
    pub seed: u64,
}

/// Cartesian-product experiment description. ε₁ = ε₂ = ε at every point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub states: Vec<LabeledState>,
    pub scheme: SchemeKind,
    pub engine: EngineKind,
    pub estimator: WeakEstimator,
    pub eps_grid: Vec<f64>,
    pub a_grid: Vec<f64>,
    pub n_list: Vec<u64>,
    pub runs: u64,
    pub seed: u64,
    pub workers: usize,
}

impl SweepSpec {
    /// ε grid 0.1..=2.0 in steps of 0.1.
    pub fn default_eps_grid() -> Vec<f64> {
        (1..=20).map(|k| k as f64 / 10.0).collect()
    }

    /// a ∈ {0, 0.2, 0.4, 0.6, 0.8}.
    pub fn default_a_grid() -> Vec<f64> {
        (0..5).map(|k| k as f64 / 5.0).collect()
    }

    fn check(&self) -> Result<(), HarnessError> {
        if self.states.is_empty() {
            return Err(HarnessError::NoStates);
        }
        if !self.scheme.is_weak() {
            return Err(HarnessError::NotWeak(self.scheme));
        }
        for (name, empty) in [
            ("eps", self.eps_grid.is_empty()),
            ("discard", self.a_grid.is_empty()),
            ("ensemble size", self.n_list.is_empty()),
        ] {
            if empty {
                return Err(HarnessError::EmptyGrid(name));
            }
        }
        for s in &self.states {
            for cell in self.cells_for(0, s) {
                cell.config
                    .validate_for(s.state)
                    .map_err(|source| HarnessError::Config { id: s.id.clone(), source })?;
            }
        }
        Ok(())
    }

    /// Config of the weak cell at the given coordinates.
    pub fn weak_config(&self, state_index: usize, n: u64, a: f64, eps: f64) -> SchemeConfig {
        let seed = derive_seed(&[
            self.seed,
            state_index as u64,
            self.scheme.code(),
            n,
            a.to_bits(),
            eps.to_bits(),
        ]);
        SchemeConfig {
            scheme: self.scheme,
            engine: self.engine,
            estimator: self.estimator,
            ensemble_n: n,
            eps1: eps,
            eps2: eps,
            discard_a: a,
            runs: self.runs,
            seed,
        }
    }

    /// Config of the projective baseline cell for a state and ensemble size.
    /// Coupling fields are unused by projective schemes and set to 1 and 0.
    pub fn baseline_config(&self, state_index: usize, n: u64) -> SchemeConfig {
        let baseline = self.scheme.baseline();
        let seed = derive_seed(&[self.seed, state_index as u64, baseline.code(), n]);
        SchemeConfig {
            scheme: baseline,
            engine: self.engine,
            estimator: self.estimator,
            ensemble_n: n,
            eps1: 1.0,
            eps2: 1.0,
            discard_a: 0.0,
            runs: self.runs,
            seed,
        }
    }

    fn cells_for(&self, state_index: usize, _state: &LabeledState) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &n in &self.n_list {
            cells.push(Cell { state_index, config: self.baseline_config(state_index, n), baseline: true });
            for &a in &self.a_grid {
                for &eps in &self.eps_grid {
                    cells.push(Cell {
                        state_index,
                        config: self.weak_config(state_index, n, a, eps),
                        baseline: false,
                    });
                }
            }
        }
        cells
    }

    /// Number of rows [`sweep`] produces.
    pub fn row_count(&self) -> usize {
        self.states.len() * self.n_list.len() * (1 + self.a_grid.len() * self.eps_grid.len())
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    state_index: usize,
    config: SchemeConfig,
    baseline: bool,
}

fn evaluate(spec: &SweepSpec, cell: &Cell) -> SweepRow {
    let labeled = &spec.states[cell.state_index];
    let s = labeled.state;
    let stats = monte_carlo(s, &cell.config).expect("cells are validated before evaluation");
    let (eps1, eps2, a) = if cell.baseline {
        (0.0, 0.0, 0.0)
    } else {
        (cell.config.eps1, cell.config.eps2, cell.config.discard_a)
    };
    SweepRow {
        state_id: labeled.id.clone(),
        x: s.x,
        y: s.y,
        z: s.z,
        scheme: cell.config.scheme,
        engine: cell.config.engine,
        n: cell.config.ensemble_n,
        eps1,
        eps2,
        a,
        runs: stats.runs,
        mean_fidelity: stats.mean_fidelity,
        std_fidelity: stats.std_fidelity,
        degenerate_runs: stats.degenerate_runs,
        seed: cell.config.seed,
    }
}

fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    Ok(pool.install(job))
}

/// Evaluates every cell. Rows come out ordered by (state, N, a, ε), with the
/// projective baseline row first within each (state, N) block.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, HarnessError> {
    spec.check()?;
    let cells: Vec<Cell> = spec
        .states
        .iter()
        .enumerate()
        .flat_map(|(i, s)| spec.cells_for(i, s))
        .collect();
    with_workers(spec.workers, || cells.par_iter().map(|c| evaluate(spec, c)).collect())
}

/// Weak-scheme mean against the baseline at one ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsComparison {
    pub eps: f64,
    pub weak_mean: f64,
    pub weak_std: f64,
    /// Weak mean minus baseline mean.
    pub delta: f64,
    /// Standard error of `delta`; the two cells are sampled independently.
    pub delta_se: f64,
}

impl EpsComparison {
    /// True when the weak scheme is ahead by more than `sigmas` standard errors.
    pub fn beats(&self, sigmas: f64) -> bool {
        self.delta > sigmas * self.delta_se
    }
}

fn row_se(r: &SweepRow) -> f64 {
    r.std_fidelity / (r.runs as f64).sqrt()
}

/// Compares each weak row with the baseline row of the same state and N.
pub fn compare_to_baseline(weak: &[SweepRow], baseline: &SweepRow) -> Vec<EpsComparison> {
    let base_se = row_se(baseline);
    weak.iter()
        .map(|r| EpsComparison {
            eps: r.eps1,
            weak_mean: r.mean_fidelity,
            weak_std: r.std_fidelity,
            delta: r.mean_fidelity - baseline.mean_fidelity,
            delta_se: row_se(r).hypot(base_se),
        })
        .collect()
}

/// How a state counts as a win for the weak scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// Best mean fidelity over the ε grid beats the baseline.
    #[default]
    BestEps,
    /// Each ε is scored separately.
    PerEps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub n: u64,
    pub discard_a: f64,
    /// Set only in [`ScoreMode::PerEps`].
    pub eps: Option<f64>,
    pub wins: u64,
    pub total: u64,
}

impl ScoreRow {
    pub fn fraction(&self) -> f64 {
        self.wins as f64 / self.total as f64
    }
}

/// Win counts from already evaluated sweep rows.
pub fn score_from_rows(spec: &SweepSpec, rows: &[SweepRow], mode: ScoreMode) -> Vec<ScoreRow> {
    let block = 1 + spec.a_grid.len() * spec.eps_grid.len();
    let mut out = Vec::new();
    for (ni, &n) in spec.n_list.iter().enumerate() {
        let blocks: Vec<&[SweepRow]> = (0..spec.states.len())
            .map(|si| {
                let start = (si * spec.n_list.len() + ni) * block;
                &rows[start..start + block]
            })
            .collect();
        for (ai, &a) in spec.a_grid.iter().enumerate() {
            let weak_range = 1 + ai * spec.eps_grid.len()..1 + (ai + 1) * spec.eps_grid.len();
            match mode {
                ScoreMode::BestEps => {
                    let wins = blocks
                        .iter()
                        .filter(|b| {
                            let baseline = b[0].mean_fidelity;
                            let best = b[weak_range.clone()]
                                .iter()
                                .map(|r| r.mean_fidelity)
                                .fold(f64::NEG_INFINITY, f64::max);
                            best > baseline
                        })
                        .count() as u64;
                    out.push(ScoreRow { n, discard_a: a, eps: None, wins, total: blocks.len() as u64 });
                }
                ScoreMode::PerEps => {
                    for (ei, &eps) in spec.eps_grid.iter().enumerate() {
                        let idx = weak_range.start + ei;
                        let wins = blocks
                            .iter()
                            .filter(|b| b[idx].mean_fidelity > b[0].mean_fidelity)
                            .count() as u64;
                        out.push(ScoreRow { n, discard_a: a, eps: Some(eps), wins, total: blocks.len() as u64 });
                    }
                }
            }
        }
    }
    out
}

/// Runs the sweep and scores it. Returns the rows as well so callers can write both.
pub fn score(spec: &SweepSpec, mode: ScoreMode) -> Result<(Vec<ScoreRow>, Vec<SweepRow>), HarnessError> {
    let rows = sweep(spec)?;
    Ok((score_from_rows(spec, &rows, mode), rows))
}

/// Smallest discard value whose best-ε win fraction exceeds one half, per N.
pub fn threshold_discard(rows: &[ScoreRow], n: u64) -> Option<f64> {
    rows.iter()
        .filter(|r| r.n == n && r.eps.is_none() && r.fraction() > 0.5)
        .map(|r| r.discard_a)
        .fold(None, |acc: Option<f64>, a| Some(acc.map_or(a, |b| b.min(a))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::states;

    fn small_spec(workers: usize) -> SweepSpec {
        SweepSpec {
            states: vec![LabeledState::new("rho1", states::RHO1), LabeledState::new("rho2", states::RHO2)],
            scheme: SchemeKind::WeakFull,
            engine: EngineKind::Multinomial,
            estimator: WeakEstimator::Conditional,
            eps_grid: vec![0.3, 0.6],
            a_grid: vec![0.0, 0.4],
            n_list: vec![30, 60],
            runs: 50,
            seed: 9,
            workers,
        }
    }

    #[test]
    fn ball_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let n = 1_000_000;
        let mut sum = [0.0; 3];
        let mut r2 = 0.0;
        for _ in 0..n {
            let v = random_ball_state(&mut rng);
            assert!(v.norm_sqr() <= 1.0 + 1e-12);
            sum[0] += v.x;
            sum[1] += v.y;
            sum[2] += v.z;
            r2 += v.norm_sqr();
        }
        // per-coordinate variance is 1/5 for the uniform ball
        let tol = 3.0 * (0.2f64).sqrt() / 1e3;
        for s in sum {
            assert!((s / n as f64).abs() < tol);
        }
        // r² = u^{2/3} has variance 3/7 − 9/25
        let r2_tol = 3.0 * (3.0 / 7.0 - 9.0 / 25.0f64).sqrt() / 1e3;
        assert!((r2 / n as f64 - 0.6).abs() < r2_tol);
    }

    #[test]
    fn disk_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let n = 1_000_000;
        let (mut sx, mut sz, mut r2) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let v = random_disk_state(&mut rng);
            assert_eq!(v.y, 0.0);
            assert!(v.norm_sqr() <= 1.0 + 1e-12);
            sx += v.x;
            sz += v.z;
            r2 += v.norm_sqr();
        }
        let tol = 3.0 * (0.25f64).sqrt() / 1e3;
        assert!((sx / n as f64).abs() < tol && (sz / n as f64).abs() < tol);
        // r² uniform on [0,1]
        assert!((r2 / n as f64 - 0.5).abs() < 3.0 * (1.0 / 12.0f64).sqrt() / 1e3);
    }

    #[test]
    fn derived_seeds_differ_by_coordinate() {
        let a = derive_seed(&[1, 2, 3]);
        assert_ne!(a, derive_seed(&[1, 2, 4]));
        assert_ne!(a, derive_seed(&[1, 3, 2]));
        assert_eq!(a, derive_seed(&[1, 2, 3]));
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let cfg = SchemeConfig::new(SchemeKind::WeakFull, 30, 0.4, 0.2, 500, 77);
        let a = monte_carlo(states::RHO1, &cfg).unwrap();
        let b = monte_carlo(states::RHO1, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mean_fidelity.to_bits(), b.mean_fidelity.to_bits());
        let c = monte_carlo(states::RHO1, &SchemeConfig { seed: 78, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn collapse_runs_are_never_degenerate() {
        let cfg = SchemeConfig::new(SchemeKind::WeakFull, 30, 400.0, 0.0, 200, 3)
            .with_engine(EngineKind::Trajectory);
        let stats = monte_carlo(BlochVector::new(0.0, 0.0, 1.0), &cfg).unwrap();
        assert_eq!(stats.degenerate_runs, 0);
    }

    #[test]
    fn projective_law_and_spread() {
        let runs = 100_000;
        for (i, s) in [states::RHO1, states::RHO2].into_iter().enumerate() {
            let cfg = SchemeConfig::new(SchemeKind::ProjectiveFull, 30, 1.0, 0.0, runs, 500 + i as u64);
            let (fids, _) = run_fidelities(s, &cfg);
            let stats = monte_carlo(s, &cfg).unwrap();
            let (mean, var) = projective_fidelity_moments(&[s.x, s.y, s.z], 30);
            assert!((stats.mean_fidelity - mean).abs() < 3.0 * stats.standard_error());
            // spread of the sample variance estimated from the fourth central moment
            let m = stats.mean_fidelity;
            let m4 = fids.iter().map(|f| (f - m).powi(4)).sum::<f64>() / runs as f64;
            let se_var = ((m4 - var * var) / runs as f64).sqrt();
            assert!((stats.std_fidelity.powi(2) - var).abs() < 3.0 * se_var);
        }
        let (mean, _) = projective_fidelity_moments(&[states::RHO1.x, states::RHO1.y, states::RHO1.z], 30);
        assert!((mean - 0.7308).abs() < 1e-4);
    }

    #[test]
    fn sweep_order_and_count() {
        let spec = small_spec(2);
        let rows = sweep(&spec).unwrap();
        assert_eq!(rows.len(), spec.row_count());
        assert_eq!(rows.len(), 2 * 2 * (1 + 2 * 2));
        assert_eq!(rows[0].scheme, SchemeKind::ProjectiveFull);
        assert_eq!((rows[1].a, rows[1].eps1), (0.0, 0.3));
        assert_eq!((rows[2].a, rows[2].eps1), (0.0, 0.6));
        assert_eq!((rows[3].a, rows[3].eps1), (0.4, 0.3));
        assert_eq!(rows[5].n, 60);
        assert_eq!(rows[10].state_id, "rho2");
    }

    #[test]
    fn sweep_cell_matches_direct_call() {
        let spec = small_spec(3);
        let rows = sweep(&spec).unwrap();
        let cfg = spec.weak_config(1, 60, 0.4, 0.6);
        let direct = monte_carlo(states::RHO2, &cfg).unwrap();
        let row = rows
            .iter()
            .find(|r| r.state_id == "rho2" && r.n == 60 && r.a == 0.4 && r.eps1 == 0.6)
            .unwrap();
        assert_eq!(row.mean_fidelity, direct.mean_fidelity);
        assert_eq!(row.std_fidelity, direct.std_fidelity);
        assert_eq!(row.seed, cfg.seed);
    }

    #[test]
    fn sweep_independent_of_worker_count() {
        let one = sweep(&small_spec(1)).unwrap();
        let four = sweep(&small_spec(4)).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn sweep_rejects_bad_input() {
        let mut spec = small_spec(1);
        spec.states.clear();
        assert!(matches!(sweep(&spec), Err(HarnessError::NoStates)));
        let mut spec = small_spec(1);
        spec.eps_grid.clear();
        assert!(matches!(sweep(&spec), Err(HarnessError::EmptyGrid("eps"))));
        let mut spec = small_spec(1);
        spec.scheme = SchemeKind::WeakDisk;
        assert!(matches!(sweep(&spec), Err(HarnessError::Config { .. })));
        let mut spec = small_spec(1);
        spec.n_list = vec![31];
        assert!(sweep(&spec).is_err());
    }

    #[test]
    fn score_is_deterministic_and_consistent() {
        let spec = small_spec(2);
        let (a, rows) = score(&spec, ScoreMode::BestEps).unwrap();
        let (b, _) = score(&spec, ScoreMode::BestEps).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), spec.n_list.len() * spec.a_grid.len());
        assert!(a.iter().all(|r| r.wins <= r.total && r.total == 2));

        // singleton eps grid: a win is exactly a direct two-scheme comparison
        let mut single = small_spec(1);
        single.eps_grid = vec![0.3];
        let (scores, _) = score(&single, ScoreMode::BestEps).unwrap();
        let mut direct_wins = 0;
        for (i, s) in single.states.iter().enumerate() {
            let weak = monte_carlo(s.state, &single.weak_config(i, 30, 0.0, 0.3)).unwrap();
            let base = monte_carlo(s.state, &single.baseline_config(i, 30)).unwrap();
            if weak.mean_fidelity > base.mean_fidelity {
                direct_wins += 1;
            }
        }
        assert_eq!(scores[0].wins, direct_wins);

        let per = score_from_rows(&spec, &rows, ScoreMode::PerEps);
        assert_eq!(per.len(), spec.n_list.len() * spec.a_grid.len() * spec.eps_grid.len());
        // best-over-eps wins at least as often as any single eps
        for best in &a {
            for p in per.iter().filter(|p| p.n == best.n && p.discard_a == best.discard_a) {
                assert!(p.wins <= best.wins);
            }
        }
    }

    #[test]
    fn threshold_picks_smallest_winning_a() {
        let rows = vec![
            ScoreRow { n: 30, discard_a: 0.0, eps: None, wins: 4, total: 10 },
            ScoreRow { n: 30, discard_a: 0.2, eps: None, wins: 6, total: 10 },
            ScoreRow { n: 30, discard_a: 0.4, eps: None, wins: 7, total: 10 },
            ScoreRow { n: 60, discard_a: 0.0, eps: None, wins: 2, total: 10 },
        ];
        assert_eq!(threshold_discard(&rows, 30), Some(0.2));
        assert_eq!(threshold_discard(&rows, 60), None);
    }
}
