//! Self-check suite behind `weaktomo validate`.

use crate::bloch::{states, BlochVector, PauliAxis};
use crate::estimator::WeakEstimator;
use crate::harness::{self, projective_fidelity_moments, run_stream, LabeledState, SweepSpec};
use crate::pointer::{
    self, kraus_update, reading_density, sample_pointer_reading, stage_probs_projective_y,
    stage_probs_weak_using, PointerConfig, StageProbabilities,
};
use crate::protocol::{run_weak_full, weak_full_counts, EngineKind, SchemeConfig, SchemeKind};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Constant added to erf inside the completeness check. Test hook only.
    pub erf_offset: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self { seed: 20_240_601, erf_offset: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst measured deviation, in the units of `tolerance`.
    pub deviation: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn failed(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub fn run(opts: &ValidateOptions) -> ValidationReport {
    let checks = vec![
        povm_completeness(opts.erf_offset),
        engine_equivalence(opts.seed),
        estimator_consistency(opts.seed),
        projective_fidelity_law(opts.seed),
        damping_by_averaging(opts.seed),
        sweep_reproducibility(opts.seed),
    ];
    ValidationReport { seed: opts.seed, passed: checks.iter().all(|c| c.passed), checks }
}

fn check(name: &'static str, deviation: f64, tolerance: f64, detail: String) -> CheckResult {
    CheckResult { name, passed: deviation <= tolerance, deviation, tolerance, detail }
}

fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (hi - lo) / n as f64;
    let mut sum = f(lo) + f(hi);
    for k in 1..n {
        sum += if k % 2 == 1 { 4.0 } else { 2.0 } * f(lo + k as f64 * h);
    }
    sum * h / 3.0
}

/// Pointer densities integrate to one, and the closed-form stage
/// probabilities equal the quadrature of the reading density over each region.
fn povm_completeness(erf_offset: f64) -> CheckResult {
    let erf_fn = |x: f64| pointer::erf(x) + erf_offset;
    let mut worst: f64 = 0.0;
    let mut where_ = String::new();
    for &eps in &[0.1f64, 0.5, 1.0, 2.0, 10.0] {
        let reach = 14.0 / eps.sqrt() + 2.0;
        for &c in &[-1.0, -0.3, 0.0, 0.55, 1.0] {
            let mass = simpson(|q| reading_density(q, c, eps), -reach, reach, 40_000);
            if (mass - 1.0).abs() > worst {
                worst = (mass - 1.0).abs();
                where_ = format!("total mass at eps={eps}, c={c}");
            }
            for &a in &[0.0, 0.4, 0.8] {
                let p = stage_probs_weak_using(&erf_fn, c, eps, a);
                let regions = [
                    (p.p_plus, a, reach),
                    (p.p_minus, -reach, -a),
                    (p.p_discard, -a, a),
                ];
                for (closed, lo, hi) in regions {
                    let quad = if hi > lo {
                        simpson(|q| reading_density(q, c, eps), lo, hi, 40_000)
                    } else {
                        0.0
                    };
                    if (closed - quad).abs() > worst {
                        worst = (closed - quad).abs();
                        where_ = format!("region [{lo:.3}, {hi:.3}] at eps={eps}, c={c}, a={a}");
                    }
                }
            }
        }
    }
    check("povm_completeness", worst, 1e-8, format!("worst at {where_}"))
}

fn z_score(freq: f64, p: f64, draws: f64) -> f64 {
    let se = (p * (1.0 - p) / draws).sqrt();
    if se == 0.0 {
        if (freq - p).abs() == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        (freq - p).abs() / se
    }
}

/// Trajectory tallies reproduce the stage probabilities that drive the
/// multinomial engine.
fn engine_equivalence(seed: u64) -> CheckResult {
    let state = states::RHO1;
    let (eps, a) = (0.7, 0.4);
    let runs = 10_000u64;
    let n = 30u64;
    let cfg = SchemeConfig::new(SchemeKind::WeakFull, n, eps, a, runs, seed).with_engine(EngineKind::Trajectory);
    let mut totals = [[0u64; 3]; 3];
    for i in 0..runs {
        let mut rng = run_stream(harness::derive_seed(&[seed, 0xe9]), i);
        let c = weak_full_counts(state, &cfg, &mut rng);
        for (k, s) in [c.z, c.x, c.y].into_iter().enumerate() {
            totals[k][0] += s.n_plus;
            totals[k][1] += s.n_minus;
            totals[k][2] += s.n_discard;
        }
    }
    let expected: [StageProbabilities; 3] = [
        pointer::stage_probs_weak_z(state.z, eps, a),
        pointer::stage_probs_weak_x(state.x, eps, eps, a),
        stage_probs_projective_y(state.y, eps, eps),
    ];
    let draws = (runs * n) as f64;
    let mut worst: f64 = 0.0;
    let mut detail = String::new();
    for (k, (t, p)) in totals.iter().zip(expected.iter()).enumerate() {
        for (j, prob) in [p.p_plus, p.p_minus].into_iter().enumerate() {
            let z = z_score(t[j] as f64 / draws, prob, draws);
            if z > worst {
                worst = z;
                detail = format!("stage {} outcome {}", ["z", "x", "y"][k], ["+", "-"][j]);
            }
        }
    }
    check("engine_equivalence_sigma", worst, 3.0, format!("largest deviation at {detail}"))
}

/// The calibrated estimator recovers fixed states at N = 10⁶.
fn estimator_consistency(seed: u64) -> CheckResult {
    let fixed = [
        states::RHO1,
        states::RHO2,
        BlochVector::new(0.0, 0.0, 0.0),
        BlochVector::new(0.6, 0.0, -0.8),
        BlochVector::new(-0.2, -0.5, 0.7),
    ];
    let cfg = SchemeConfig::new(SchemeKind::WeakFull, 1_000_000, 1.0, 0.2, 1, seed)
        .with_estimator(WeakEstimator::Calibrated);
    let mut worst: f64 = 0.0;
    for (i, s) in fixed.iter().enumerate() {
        let mut rng = run_stream(harness::derive_seed(&[seed, 0xc0]), i as u64);
        let est = run_weak_full(*s, &cfg, &mut rng).value;
        for axis in PauliAxis::ALL {
            worst = worst.max((est.component(axis) - s.component(axis)).abs());
        }
    }
    check("estimator_consistency", worst, 0.01, "max component error over 5 states".into())
}

/// Mean projective fidelity against 1 − Σ(1 − c²)/(N/3).
fn projective_fidelity_law(seed: u64) -> CheckResult {
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (name, s) in [("rho1", states::RHO1), ("rho2", states::RHO2)] {
        let cfg = SchemeConfig::new(SchemeKind::ProjectiveFull, 30, 1.0, 0.0, 100_000, harness::derive_seed(&[seed, 0xf1]));
        let stats = harness::monte_carlo(s, &cfg).expect("valid config");
        let (expected, _) = projective_fidelity_moments(&[s.x, s.y, s.z], 30);
        let sigmas = (stats.mean_fidelity - expected).abs() / stats.standard_error();
        worst = worst.max(sigmas);
        detail.push(format!("{name}: {:.5} vs {:.5}", stats.mean_fidelity, expected));
    }
    check("projective_fidelity_law_sigma", worst, 3.0, detail.join("; "))
}

/// Averages of conditional updates reproduce the e^{−ε/2} damping.
fn damping_by_averaging(seed: u64) -> CheckResult {
    let state = BlochVector::new(0.5, -0.3, 0.6);
    let eps = 0.8;
    let samples = 200_000u64;
    let ptr = PointerConfig::new(eps, 0.0).expect("positive coupling");
    let mut rng = run_stream(harness::derive_seed(&[seed, 0xda]), 0);
    let mut sum = [0.0; 3];
    let mut sq = [0.0; 3];
    for _ in 0..samples {
        let q = sample_pointer_reading(state, PauliAxis::Z, ptr, &mut rng);
        let out = kraus_update(state, PauliAxis::Z, eps, q);
        for (k, v) in [out.x, out.y, out.z].into_iter().enumerate() {
            sum[k] += v;
            sq[k] += v * v;
        }
    }
    let target = pointer::unconditional_update(state, PauliAxis::Z, eps);
    let mut worst: f64 = 0.0;
    for (k, t) in [target.x, target.y, target.z].into_iter().enumerate() {
        let m = sum[k] / samples as f64;
        let se = ((sq[k] / samples as f64 - m * m) / samples as f64).sqrt();
        worst = worst.max((m - t).abs() / se);
    }
    check("damping_by_averaging_sigma", worst, 3.0, format!("eps={eps}, {samples} readings"))
}

fn sweep_reproducibility(seed: u64) -> CheckResult {
    let spec = |workers| SweepSpec {
        states: vec![LabeledState::new("rho1", states::RHO1), LabeledState::new("rho2", states::RHO2)],
        scheme: SchemeKind::WeakFull,
        engine: EngineKind::Multinomial,
        estimator: WeakEstimator::Conditional,
        eps_grid: vec![0.2, 0.5, 1.0],
        a_grid: vec![0.0, 0.4],
        n_list: vec![30],
        runs: 200,
        seed,
        workers,
    };
    let one = harness::sweep(&spec(1)).expect("valid sweep");
    let four = harness::sweep(&spec(4)).expect("valid sweep");
    let mismatches = one
        .iter()
        .zip(&four)
        .filter(|(a, b)| {
            a.mean_fidelity.to_bits() != b.mean_fidelity.to_bits()
                || a.std_fidelity.to_bits() != b.std_fidelity.to_bits()
                || a.seed != b.seed
        })
        .count()
        + one.len().abs_diff(four.len());
    check(
        "sweep_reproducibility",
        mismatches as f64,
        0.0,
        format!("{} rows compared across 1 and 4 workers", one.len()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let report = run(&ValidateOptions::default());
        for c in &report.checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(report.passed);
    }

    #[test]
    fn injected_erf_error_is_caught() {
        let report = run(&ValidateOptions { erf_offset: 1e-3, ..Default::default() });
        let povm = report.checks.iter().find(|c| c.name == "povm_completeness").unwrap();
        assert!(!povm.passed);
        assert!(!report.passed);
    }
}
