//! Ensemble-level tomography schemes.
//!
//! Every scheme can be run with two engines. [`EngineKind::Trajectory`] follows
//! each copy through its measurement chain with sampled pointer readings and
//! conditional state updates. [`EngineKind::Multinomial`] draws each stage's
//! tallies directly from the closed-form stage probabilities, which are the
//! reading-marginals of the same chain.

use crate::bloch::{BlochVector, EstimateVector, PauliAxis};
use crate::estimator::{
    estimate_projective_component, ComponentEstimate, Estimate, OutcomeCounts, WeakEstimator,
};
use crate::pointer::{
    self, classify, kraus_update, projective_probs, sample_pointer_reading, stage_probs_projective_y,
    stage_probs_weak, stage_probs_weak_x, stage_probs_weak_z, PointerConfig,
};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    /// Weak σz, weak σx, projective σy on every copy.
    WeakFull,
    /// Thirds of the ensemble measured projectively along x, y, z.
    ProjectiveFull,
    /// Two halves: weak σz then projective σx, and weak σx then projective σz.
    WeakDisk,
    /// Halves measured projectively along x and z.
    ProjectiveDisk,
}

impl SchemeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeKind::WeakFull => "weak_full",
            SchemeKind::ProjectiveFull => "projective_full",
            SchemeKind::WeakDisk => "weak_disk",
            SchemeKind::ProjectiveDisk => "projective_disk",
        }
    }

    pub fn is_weak(&self) -> bool {
        matches!(self, SchemeKind::WeakFull | SchemeKind::WeakDisk)
    }

    pub fn is_disk(&self) -> bool {
        matches!(self, SchemeKind::WeakDisk | SchemeKind::ProjectiveDisk)
    }

    /// The projective scheme a weak scheme is scored against.
    pub fn baseline(&self) -> SchemeKind {
        if self.is_disk() {
            SchemeKind::ProjectiveDisk
        } else {
            SchemeKind::ProjectiveFull
        }
    }

    pub(crate) fn code(&self) -> u64 {
        match self {
            SchemeKind::WeakFull => 1,
            SchemeKind::ProjectiveFull => 2,
            SchemeKind::WeakDisk => 3,
            SchemeKind::ProjectiveDisk => 4,
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Trajectory,
    #[default]
    Multinomial,
}

impl EngineKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EngineKind::Trajectory => "trajectory",
            EngineKind::Multinomial => "multinomial",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EngineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "trajectory" => Ok(EngineKind::Trajectory),
            "multinomial" => Ok(EngineKind::Multinomial),
            other => Err(format!("unknown engine '{other}' (expected trajectory|multinomial)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("ensemble size must be at least 3, got {0}")]
    EnsembleTooSmall(u64),
    #[error("ensemble size {n} is not divisible by {by} as {scheme} requires")]
    Indivisible { n: u64, by: u64, scheme: SchemeKind },
    #[error("{name} must be finite and > 0, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("discard half-width must be finite and >= 0, got {0}")]
    NegativeDiscard(f64),
    #[error("run count must be at least 1")]
    NoRuns,
    #[error("disk schemes need states with y = 0, got y = {0}")]
    OffDisk(f64),
    #[error("state {0} lies outside the Bloch ball")]
    Unphysical(BlochVector),
}

/// Everything needed to run one scheme repeatedly on one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: SchemeKind,
    pub engine: EngineKind,
    pub estimator: WeakEstimator,
    pub ensemble_n: u64,
    pub eps1: f64,
    pub eps2: f64,
    pub discard_a: f64,
    pub runs: u64,
    pub seed: u64,
}

impl SchemeConfig {
    /// A config with ε₁ = ε₂ = `eps` and the default engine and estimator.
    pub fn new(scheme: SchemeKind, ensemble_n: u64, eps: f64, discard_a: f64, runs: u64, seed: u64) -> Self {
        Self {
            scheme,
            engine: EngineKind::default(),
            estimator: WeakEstimator::default(),
            ensemble_n,
            eps1: eps,
            eps2: eps,
            discard_a,
            runs,
            seed,
        }
    }

    pub fn with_engine(mut self, engine: EngineKind) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_estimator(mut self, estimator: WeakEstimator) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.ensemble_n < 3 {
            return Err(ConfigError::EnsembleTooSmall(self.ensemble_n));
        }
        let divisor = match self.scheme {
            SchemeKind::ProjectiveFull => 3,
            SchemeKind::WeakDisk | SchemeKind::ProjectiveDisk => 2,
            SchemeKind::WeakFull => 1,
        };
        if !self.ensemble_n.is_multiple_of(divisor) {
            return Err(ConfigError::Indivisible { n: self.ensemble_n, by: divisor, scheme: self.scheme });
        }
        for (name, value) in [("eps1", self.eps1), ("eps2", self.eps2)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::NonPositive { name, value });
            }
        }
        if !(self.discard_a.is_finite() && self.discard_a >= 0.0) {
            return Err(ConfigError::NegativeDiscard(self.discard_a));
        }
        if self.runs == 0 {
            return Err(ConfigError::NoRuns);
        }
        Ok(())
    }

    /// Checks the config and that `state` is admissible for the scheme.
    pub fn validate_for(&self, state: BlochVector) -> Result<(), ConfigError> {
        self.validate()?;
        if !state.is_physical() {
            return Err(ConfigError::Unphysical(state));
        }
        if self.scheme.is_disk() && state.y != 0.0 {
            return Err(ConfigError::OffDisk(state.y));
        }
        Ok(())
    }

    fn pointer(&self, epsilon: f64) -> PointerConfig {
        PointerConfig::new(epsilon, self.discard_a).expect("validated scheme config")
    }
}

/// Stage tallies of one weak-weak-projective run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FullCounts {
    pub z: OutcomeCounts,
    pub x: OutcomeCounts,
    pub y: OutcomeCounts,
}

/// Stage tallies of one weak disk run. Half A measures σz weakly then σx
/// projectively; half B does the reverse.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DiskCounts {
    pub a_weak_z: OutcomeCounts,
    pub a_proj_x: OutcomeCounts,
    pub b_weak_x: OutcomeCounts,
    pub b_proj_z: OutcomeCounts,
}

fn projective_outcome<R: Rng + ?Sized>(signal: f64, rng: &mut R) -> pointer::Outcome {
    if rng.random::<f64>() < 0.5 * (1.0 + signal) {
        pointer::Outcome::Plus
    } else {
        pointer::Outcome::Minus
    }
}

/// Projective tallies of `n` copies of a component with expectation `signal`.
fn projective_counts<R: Rng + ?Sized>(signal: f64, n: u64, engine: EngineKind, rng: &mut R) -> OutcomeCounts {
    match engine {
        EngineKind::Multinomial => OutcomeCounts::draw(&projective_probs(signal), n, rng),
        EngineKind::Trajectory => {
            let mut counts = OutcomeCounts::default();
            for _ in 0..n {
                counts.record(projective_outcome(signal, rng));
            }
            counts
        }
    }
}

/// Tallies of the three stages of the weak-weak-projective chain.
pub fn weak_full_counts<R: Rng + ?Sized>(state: BlochVector, cfg: &SchemeConfig, rng: &mut R) -> FullCounts {
    let n = cfg.ensemble_n;
    match cfg.engine {
        EngineKind::Multinomial => FullCounts {
            z: OutcomeCounts::draw(&stage_probs_weak_z(state.z, cfg.eps1, cfg.discard_a), n, rng),
            x: OutcomeCounts::draw(&stage_probs_weak_x(state.x, cfg.eps1, cfg.eps2, cfg.discard_a), n, rng),
            y: OutcomeCounts::draw(&stage_probs_projective_y(state.y, cfg.eps1, cfg.eps2), n, rng),
        },
        EngineKind::Trajectory => {
            let first = cfg.pointer(cfg.eps1);
            let second = cfg.pointer(cfg.eps2);
            let mut counts = FullCounts::default();
            for _ in 0..n {
                // a discarded reading still updates the copy, which goes on
                let q1 = sample_pointer_reading(state, PauliAxis::Z, first, rng);
                counts.z.record(classify(q1, first));
                let after_z = kraus_update(state, PauliAxis::Z, cfg.eps1, q1);

                let q2 = sample_pointer_reading(after_z, PauliAxis::X, second, rng);
                counts.x.record(classify(q2, second));
                let after_x = kraus_update(after_z, PauliAxis::X, cfg.eps2, q2);

                counts.y.record(projective_outcome(after_x.y, rng));
            }
            debug_assert!(
                counts.z.n_total() == n && counts.x.n_total() == n && counts.y.n_total() == n
            );
            counts
        }
    }
}

/// Weak σz, weak σx, projective σy on all copies.
pub fn run_weak_full<R: Rng + ?Sized>(state: BlochVector, cfg: &SchemeConfig, rng: &mut R) -> Estimate {
    debug_assert_eq!(cfg.scheme, SchemeKind::WeakFull);
    let counts = weak_full_counts(state, cfg, rng);
    crate::estimator::assemble_full_estimate_with(
        cfg.estimator,
        &counts.z,
        &counts.x,
        &counts.y,
        cfg.eps1,
        cfg.eps2,
        cfg.discard_a,
    )
}

/// Projective tallies (x, y, z) of the three-way split.
pub fn projective_full_counts<R: Rng + ?Sized>(state: BlochVector, cfg: &SchemeConfig, rng: &mut R) -> FullCounts {
    let third = cfg.ensemble_n / 3;
    FullCounts {
        x: projective_counts(state.x, third, cfg.engine, rng),
        y: projective_counts(state.y, third, cfg.engine, rng),
        z: projective_counts(state.z, third, cfg.engine, rng),
    }
}

pub fn run_projective_full<R: Rng + ?Sized>(state: BlochVector, cfg: &SchemeConfig, rng: &mut R) -> Estimate {
    let c = projective_full_counts(state, cfg, rng);
    Estimate::from_components(
        estimate_projective_component(&c.x, 1.0),
        estimate_projective_component(&c.y, 1.0),
        estimate_projective_component(&c.z, 1.0),
    )
}

/// One half of the weak disk scheme: weak measurement along `weak`, then
/// projective along `strong`.
fn disk_half<R: Rng + ?Sized>(
    state: BlochVector,
    weak: PauliAxis,
    strong: PauliAxis,
    n: u64,
    cfg: &SchemeConfig,
    rng: &mut R,
) -> (OutcomeCounts, OutcomeCounts) {
    match cfg.engine {
        EngineKind::Multinomial => {
            let weak_probs = stage_probs_weak(state.component(weak), cfg.eps1, cfg.discard_a);
            let damped = state.component(strong) * pointer::damping_factor(cfg.eps1);
            (
                OutcomeCounts::draw(&weak_probs, n, rng),
                OutcomeCounts::draw(&projective_probs(damped), n, rng),
            )
        }
        EngineKind::Trajectory => {
            let ptr = cfg.pointer(cfg.eps1);
            let mut weak_counts = OutcomeCounts::default();
            let mut strong_counts = OutcomeCounts::default();
            for _ in 0..n {
                let q = sample_pointer_reading(state, weak, ptr, rng);
                weak_counts.record(classify(q, ptr));
                let after = kraus_update(state, weak, cfg.eps1, q);
                strong_counts.record(projective_outcome(after.component(strong), rng));
            }
            (weak_counts, strong_counts)
        }
    }
}

pub fn weak_disk_counts<R: Rng + ?Sized>(state: BlochVector, cfg: &SchemeConfig, rng: &mut R) -> DiskCounts {
    let half = cfg.ensemble_n / 2;
    let (a_weak_z, a_proj_x) = disk_half(state, PauliAxis::Z, PauliAxis::X, half, cfg, rng);
    let (b_weak_x, b_proj_z) = disk_half(state, PauliAxis::X, PauliAxis::Z, half, cfg, rng);
    DiskCounts { a_weak_z, a_proj_x, b_weak_x, b_proj_z }
}

fn mean_of(a: ComponentEstimate, b: ComponentEstimate) -> ComponentEstimate {
    ComponentEstimate { value: 0.5 * (a.value + b.value), degenerate: a.degenerate || b.degenerate }
}

/// Estimate (x, 0, z) from the two disk halves, combined by a plain average.
pub fn estimate_from_disk_counts(c: &DiskCounts, cfg: &SchemeConfig) -> Estimate {
    let correction = (cfg.eps1 / 2.0).exp();
    let z_a = cfg.estimator.estimate(&c.a_weak_z, cfg.eps1, cfg.discard_a, 1.0);
    let x_a = estimate_projective_component(&c.a_proj_x, correction);
    let x_b = cfg.estimator.estimate(&c.b_weak_x, cfg.eps1, cfg.discard_a, 1.0);
    let z_b = estimate_projective_component(&c.b_proj_z, correction);
    let zero = ComponentEstimate { value: 0.0, degenerate: false };
    Estimate::from_components(mean_of(x_a, x_b), zero, mean_of(z_a, z_b))
}

/// Weak disk scheme. The weak stages use `cfg.eps1`.
pub fn run_weak_disk<R: Rng + ?Sized>(state: BlochVector, cfg: &SchemeConfig, rng: &mut R) -> Estimate {
    let counts = weak_disk_counts(state, cfg, rng);
    estimate_from_disk_counts(&counts, cfg)
}

pub fn run_projective_disk<R: Rng + ?Sized>(state: BlochVector, cfg: &SchemeConfig, rng: &mut R) -> Estimate {
    let half = cfg.ensemble_n / 2;
    let x = projective_counts(state.x, half, cfg.engine, rng);
    let z = projective_counts(state.z, half, cfg.engine, rng);
    Estimate {
        value: EstimateVector::new(
            estimate_projective_component(&x, 1.0).value,
            0.0,
            estimate_projective_component(&z, 1.0).value,
        ),
        degenerate: false,
    }
}

/// Runs whichever scheme `cfg` names.
pub fn run_scheme<R: Rng + ?Sized>(state: BlochVector, cfg: &SchemeConfig, rng: &mut R) -> Estimate {
    match cfg.scheme {
        SchemeKind::WeakFull => run_weak_full(state, cfg, rng),
        SchemeKind::ProjectiveFull => run_projective_full(state, cfg, rng),
        SchemeKind::WeakDisk => run_weak_disk(state, cfg, rng),
        SchemeKind::ProjectiveDisk => run_projective_disk(state, cfg, rng),
    }
}
