//! JSON experiment configuration.

use crate::bloch::{states, BlochVector};
use crate::estimator::WeakEstimator;
use crate::harness::{ball_states, disk_states, LabeledState, ScoreMode, SweepSpec};
use crate::protocol::{EngineKind, SchemeKind};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// A grid given either as explicit values or as an inclusive range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Range(RangeSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn expand(&self) -> Result<Vec<f64>, String> {
        match self {
            GridSpec::Values(v) => Ok(v.clone()),
            GridSpec::Range(r) => {
                if !(r.step.is_finite() && r.step > 0.0) {
                    return Err(format!("range step must be > 0, got {}", r.step));
                }
                if !(r.start.is_finite() && r.stop.is_finite()) || r.stop < r.start {
                    return Err(format!("range [{}, {}] is empty or not finite", r.start, r.stop));
                }
                let count = ((r.stop - r.start) / r.step + 1e-9).floor() as usize + 1;
                // rounding keeps 0.1-step grids free of binary noise like 0.30000000000000004
                Ok((0..count)
                    .map(|k| ((r.start + k as f64 * r.step) * 1e12).round() / 1e12)
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitState {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Where the states of an experiment come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum StatesSource {
    Explicit(Vec<ExplicitState>),
    /// Built-in states by name (`rho1`, `rho2`).
    Named(Vec<String>),
    /// Uniform samples from the Bloch ball.
    Ball(usize),
    /// Uniform samples from the y = 0 disk.
    Disk(usize),
}

impl StatesSource {
    pub fn resolve(&self, seed: u64) -> Result<Vec<LabeledState>, String> {
        match self {
            StatesSource::Explicit(list) => Ok(list
                .iter()
                .map(|s| LabeledState::new(s.id.clone(), BlochVector::new(s.x, s.y, s.z)))
                .collect()),
            StatesSource::Named(names) => names
                .iter()
                .map(|n| {
                    states::by_name(n)
                        .map(|s| LabeledState::new(n.clone(), s))
                        .ok_or_else(|| format!("unknown built-in state '{n}' (expected rho1|rho2)"))
                })
                .collect(),
            StatesSource::Ball(count) => Ok(ball_states(*count, seed)),
            StatesSource::Disk(count) => Ok(disk_states(*count, seed)),
        }
    }
}

fn default_scheme() -> SchemeKind {
    SchemeKind::WeakFull
}

fn default_ensemble_sizes() -> Vec<u64> {
    vec![30]
}

fn default_eps() -> GridSpec {
    GridSpec::Range(RangeSpec { start: 0.1, stop: 2.0, step: 0.1 })
}

fn default_discard() -> GridSpec {
    GridSpec::Values(SweepSpec::default_a_grid())
}

fn default_runs() -> u64 {
    1000
}

fn default_plot_data() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_scheme")]
    pub scheme: SchemeKind,
    #[serde(default)]
    pub engine: EngineKind,
    #[serde(default)]
    pub estimator: WeakEstimator,
    pub states: StatesSource,
    #[serde(default = "default_ensemble_sizes")]
    pub ensemble_sizes: Vec<u64>,
    #[serde(default = "default_eps")]
    pub eps: GridSpec,
    #[serde(default = "default_discard")]
    pub discard: GridSpec,
    #[serde(default = "default_runs")]
    pub runs: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub score_mode: ScoreMode,
    #[serde(default = "default_plot_data")]
    pub plot_data: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, super::CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| super::CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| super::CliError::Config(format!("{}: {e}", path.display())))
    }

    /// SHA-256 of the canonical JSON form of the config. Worker count and
    /// output directory do not affect results and are left out.
    pub fn hash(&self) -> String {
        let experiment = Self { workers: None, out: None, ..self.clone() };
        let canonical = serde_json::to_vec(&experiment).expect("config serialises");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Builds the harness description, validating every field.
    pub fn to_spec(&self, workers: usize) -> Result<SweepSpec, String> {
        let states = self.states.resolve(self.seed)?;
        if states.is_empty() {
            return Err("state list is empty".into());
        }
        if !self.scheme.is_weak() {
            return Err(format!("scheme must be weak_full or weak_disk, got {}", self.scheme));
        }
        let eps_grid = self.eps.expand().map_err(|e| format!("eps: {e}"))?;
        let a_grid = self.discard.expand().map_err(|e| format!("discard: {e}"))?;
        if eps_grid.is_empty() || a_grid.is_empty() || self.ensemble_sizes.is_empty() {
            return Err("eps, discard and ensemble_sizes must be non-empty".into());
        }
        let spec = SweepSpec {
            states,
            scheme: self.scheme,
            engine: self.engine,
            estimator: self.estimator,
            eps_grid,
            a_grid,
            n_list: self.ensemble_sizes.clone(),
            runs: self.runs,
            seed: self.seed,
            workers,
        };
        for (i, s) in spec.states.iter().enumerate() {
            for &n in &spec.n_list {
                spec.baseline_config(i, n)
                    .validate_for(s.state)
                    .map_err(|e| format!("state '{}': {e}", s.id))?;
                for &a in &spec.a_grid {
                    for &eps in &spec.eps_grid {
                        spec.weak_config(i, n, a, eps)
                            .validate_for(s.state)
                            .map_err(|e| format!("state '{}': {e}", s.id))?;
                    }
                }
            }
        }
        Ok(spec)
    }
}
