//! Turning outcome tallies into Bloch-component estimates.
//!
//! Two estimators are provided for weak stages:
//!
//! * [`WeakEstimator::Calibrated`] inverts P₊ − P₋ = c·D(ε, a) exactly, which
//!   is unbiased for every coupling but amplifies the counting noise by 1/D.
//! * [`WeakEstimator::Conditional`] reads the component as the ±1 average over
//!   kept readings, (n₊ − n₋)/(n₊ + n₋). It is shrunk towards the origin by
//!   D/(1 − P_discard) and is the estimator the tomography schemes use by default.
//!
//! Both then apply the exponential correction that undoes the damping caused
//! by earlier stages on the same copy.

use crate::bloch::EstimateVector;
use crate::pointer::{erfc, Outcome, StageProbabilities};
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Calibration denominators below this make an estimate uninformative.
pub const DEGENERATE_THRESHOLD: f64 = 1e-12;

/// Tallies of one measurement stage over an ensemble.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutcomeCounts {
    pub n_plus: u64,
    pub n_minus: u64,
    pub n_discard: u64,
}

impl OutcomeCounts {
    pub const fn new(n_plus: u64, n_minus: u64, n_discard: u64) -> Self {
        Self { n_plus, n_minus, n_discard }
    }

    pub fn n_total(&self) -> u64 {
        self.n_plus + self.n_minus + self.n_discard
    }

    pub fn n_kept(&self) -> u64 {
        self.n_plus + self.n_minus
    }

    pub fn record(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::Plus => self.n_plus += 1,
            Outcome::Minus => self.n_minus += 1,
            Outcome::Discard => self.n_discard += 1,
        }
    }

    /// Signed difference n₊ − n₋.
    pub fn asymmetry(&self) -> f64 {
        self.n_plus as f64 - self.n_minus as f64
    }

    /// Multinomial draw of `n` independent outcomes with the given probabilities.
    pub fn draw<R: Rng + ?Sized>(probs: &StageProbabilities, n: u64, rng: &mut R) -> Self {
        let n_plus = binomial(n, probs.p_plus, rng);
        let rest = n - n_plus;
        let p_minus = if probs.p_plus >= 1.0 {
            0.0
        } else {
            (probs.p_minus / (1.0 - probs.p_plus)).clamp(0.0, 1.0)
        };
        let n_minus = binomial(rest, p_minus, rng);
        Self::new(n_plus, n_minus, rest - n_minus)
    }
}

fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    let p = p.clamp(0.0, 1.0);
    if n == 0 || p == 0.0 {
        return 0;
    }
    if p == 1.0 {
        return n;
    }
    Binomial::new(n, p)
        .expect("probability clamped to [0, 1]")
        .sample(rng)
}

/// A single component estimate and whether it carried no information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentEstimate {
    pub value: f64,
    pub degenerate: bool,
}

impl ComponentEstimate {
    const DEGENERATE: ComponentEstimate = ComponentEstimate { value: 0.0, degenerate: true };

    fn ok(value: f64) -> Self {
        Self { value, degenerate: false }
    }
}

/// Full three-component estimate; `degenerate` is set when any component was.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: EstimateVector,
    pub degenerate: bool,
}

impl Estimate {
    pub fn from_components(x: ComponentEstimate, y: ComponentEstimate, z: ComponentEstimate) -> Self {
        Self {
            value: EstimateVector::new(x.value, y.value, z.value),
            degenerate: x.degenerate || y.degenerate || z.degenerate,
        }
    }
}

/// How a weak-stage tally is converted into a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeakEstimator {
    Calibrated,
    #[default]
    Conditional,
}

impl WeakEstimator {
    pub fn as_str(&self) -> &'static str {
        match self {
            WeakEstimator::Calibrated => "calibrated",
            WeakEstimator::Conditional => "conditional",
        }
    }

    /// Component from a weak stage of strength `epsilon` and discard `a`.
    pub fn estimate(&self, counts: &OutcomeCounts, epsilon: f64, a: f64, correction: f64) -> ComponentEstimate {
        match self {
            WeakEstimator::Calibrated => {
                estimate_weak_component(counts, calibration_d(epsilon, a), correction)
            }
            WeakEstimator::Conditional => estimate_weak_component_conditional(counts, correction),
        }
    }
}

impl fmt::Display for WeakEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeakEstimator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "calibrated" => Ok(WeakEstimator::Calibrated),
            "conditional" => Ok(WeakEstimator::Conditional),
            other => Err(format!("unknown estimator '{other}' (expected calibrated|conditional)")),
        }
    }
}

/// D(ε, a) = ½[erfc((a−1)√(ε/2)) − erfc((a+1)√(ε/2))], so that P₊ − P₋ = c·D.
pub fn calibration_d(epsilon: f64, a: f64) -> f64 {
    let s = (epsilon / 2.0).sqrt();
    0.5 * (erfc((a - 1.0) * s) - erfc((a + 1.0) * s))
}

/// Unbiased inversion: correction · (n₊ − n₋) / (N · D). An all-discarded
/// (or empty) tally returns 0 flagged as degenerate.
pub fn estimate_weak_component(counts: &OutcomeCounts, d: f64, correction: f64) -> ComponentEstimate {
    let n = counts.n_total();
    if counts.n_kept() == 0 || d < DEGENERATE_THRESHOLD {
        return ComponentEstimate::DEGENERATE;
    }
    ComponentEstimate::ok(correction * counts.asymmetry() / (n as f64 * d))
}

/// Kept-reading average: correction · (n₊ − n₋) / (n₊ + n₋).
pub fn estimate_weak_component_conditional(counts: &OutcomeCounts, correction: f64) -> ComponentEstimate {
    let kept = counts.n_kept();
    if kept == 0 {
        return ComponentEstimate::DEGENERATE;
    }
    ComponentEstimate::ok(correction * counts.asymmetry() / kept as f64)
}

/// correction · (n₊ − n₋) / N for a projective stage.
pub fn estimate_projective_component(counts: &OutcomeCounts, correction: f64) -> ComponentEstimate {
    debug_assert_eq!(counts.n_discard, 0, "projective stages never discard");
    let n = counts.n_total();
    if n == 0 {
        return ComponentEstimate::DEGENERATE;
    }
    ComponentEstimate::ok(correction * counts.asymmetry() / n as f64)
}

/// Estimate for the weak σz → weak σx → projective σy chain using the
/// calibrated inversion on both weak stages.
pub fn assemble_full_estimate(
    cz: &OutcomeCounts,
    cx: &OutcomeCounts,
    cy: &OutcomeCounts,
    eps1: f64,
    eps2: f64,
    a: f64,
) -> Estimate {
    assemble_full_estimate_with(WeakEstimator::Calibrated, cz, cx, cy, eps1, eps2, a)
}

pub fn assemble_full_estimate_with(
    kind: WeakEstimator,
    cz: &OutcomeCounts,
    cx: &OutcomeCounts,
    cy: &OutcomeCounts,
    eps1: f64,
    eps2: f64,
    a: f64,
) -> Estimate {
    let z = kind.estimate(cz, eps1, a, 1.0);
    let x = kind.estimate(cx, eps2, a, (eps1 / 2.0).exp());
    let y = estimate_projective_component(cy, ((eps1 + eps2) / 2.0).exp());
    Estimate::from_components(x, y, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::states;
    use crate::pointer::{erf, reading_density, stage_probs_projective_y, stage_probs_weak_x, stage_probs_weak_z};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Simpson quadrature of the signed keep-region mass: (∫_a^∞ − ∫_{-∞}^{-a}) of
    /// the +1 branch density minus the same for the −1 branch, halved.
    fn d_by_quadrature(eps: f64, a: f64) -> f64 {
        let upper = 1.0 + 14.0 / eps.sqrt();
        let simpson = |c: f64, lo: f64, hi: f64| {
            let n = 20_000;
            let h = (hi - lo) / n as f64;
            let mut s = reading_density(lo, c, eps) + reading_density(hi, c, eps);
            for k in 1..n {
                s += if k % 2 == 1 { 4.0 } else { 2.0 } * reading_density(lo + k as f64 * h, c, eps);
            }
            s * h / 3.0
        };
        let up_plus = simpson(1.0, a, upper);
        let up_minus = simpson(1.0, -upper, -a);
        let down_plus = simpson(-1.0, a, upper);
        let down_minus = simpson(-1.0, -upper, -a);
        0.5 * ((up_plus - up_minus) - (down_plus - down_minus))
    }

    #[test]
    fn calibration_denominator_values() {
        assert_abs_diff_eq!(calibration_d(1.0, 0.0), erf(0.5f64.sqrt()), epsilon = 1e-15);
        assert_abs_diff_eq!(calibration_d(1.0, 0.0), 0.682_689, epsilon = 1e-6);
        assert_abs_diff_eq!(calibration_d(1e4, 0.0), 1.0, epsilon = 1e-15);
        let d = calibration_d(1.0, 0.8);
        assert_abs_diff_eq!(d, 0.543_329_4, epsilon = 1e-7);
        assert_abs_diff_eq!(d, d_by_quadrature(1.0, 0.8), epsilon = 1e-10);
        assert_abs_diff_eq!(calibration_d(0.3, 0.4), d_by_quadrature(0.3, 0.4), epsilon = 1e-10);
    }

    #[test]
    fn calibration_is_in_unit_interval() {
        for eps in [1e-4, 0.1, 1.0, 10.0, 400.0] {
            for a in [0.0, 0.5, 1.0, 3.0] {
                let d = calibration_d(eps, a);
                assert!((0.0..=1.0).contains(&d), "D({eps}, {a}) = {d}");
                if a <= 1.0 {
                    assert!(d > 0.0, "D({eps}, {a}) = {d}");
                }
            }
        }
    }

    #[test]
    fn weak_component_arithmetic() {
        let e = estimate_weak_component(&OutcomeCounts::new(20, 10, 0), 1.0, 1.0);
        assert_abs_diff_eq!(e.value, 1.0 / 3.0, epsilon = 1e-15);
        assert!(!e.degenerate);

        let e = estimate_weak_component(&OutcomeCounts::new(0, 0, 30), 0.5, 1.0);
        assert_eq!((e.value, e.degenerate), (0.0, true));
        let e = estimate_weak_component_conditional(&OutcomeCounts::new(0, 0, 30), 1.0);
        assert_eq!((e.value, e.degenerate), (0.0, true));

        let e = estimate_weak_component(&OutcomeCounts::new(0, 0, 0), 0.5, 1.0);
        assert!(e.degenerate);
        let e = estimate_weak_component(&OutcomeCounts::new(5, 1, 0), 1e-13, 1.0);
        assert_eq!((e.value, e.degenerate), (0.0, true));
    }

    #[test]
    fn conditional_component_ignores_discards() {
        let e = estimate_weak_component_conditional(&OutcomeCounts::new(6, 2, 22), 2.0);
        assert_abs_diff_eq!(e.value, 1.0, epsilon = 1e-15);
        assert!(!e.degenerate);
    }

    #[test]
    fn projective_component_arithmetic() {
        let e = estimate_projective_component(&OutcomeCounts::new(15, 15, 0), 1.0);
        assert_eq!(e.value, 0.0);
        let e = estimate_projective_component(&OutcomeCounts::new(30, 0, 0), 0.5f64.exp());
        assert_abs_diff_eq!(e.value, 1.648_721_270_700_128, epsilon = 1e-15);
        assert!(estimate_projective_component(&OutcomeCounts::default(), 1.0).degenerate);
    }

    #[test]
    fn large_n_weak_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 1_000_000;
        let p = stage_probs_weak_z(0.397, 1.0, 0.5);
        let counts = OutcomeCounts::draw(&p, n, &mut rng);
        let d = calibration_d(1.0, 0.5);
        let e = estimate_weak_component(&counts, d, 1.0);
        let kept = p.p_plus + p.p_minus;
        let var = (kept - (p.p_plus - p.p_minus).powi(2)) / (d * d);
        assert!((e.value - 0.397).abs() < 3.0 * var.sqrt() / 1e3, "{}", e.value);
    }

    #[test]
    fn large_n_projective_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let n = 1_000_000;
        let p = stage_probs_projective_y(0.398, 0.5, 0.5);
        let counts = OutcomeCounts::draw(&p, n, &mut rng);
        let corr = 0.5f64.exp();
        let e = estimate_projective_component(&counts, corr);
        let sd = corr * (1.0 - (p.p_plus - p.p_minus).powi(2)).sqrt() / 1e3;
        assert!((e.value - 0.398).abs() < 3.0 * sd);
    }

    #[test]
    fn plug_in_inversion_recovers_rho2() {
        let (eps, a) = (0.3, 0.2);
        let n = 10_000_000u64;
        let nf = n as f64;
        let v = states::RHO2;
        let to_counts = |p: StageProbabilities| {
            let plus = (nf * p.p_plus).round() as u64;
            let minus = (nf * p.p_minus).round() as u64;
            OutcomeCounts::new(plus, minus, n - plus - minus)
        };
        let cz = to_counts(stage_probs_weak_z(v.z, eps, a));
        let cx = to_counts(stage_probs_weak_x(v.x, eps, eps, a));
        let cy = to_counts(stage_probs_projective_y(v.y, eps, eps));
        let est = assemble_full_estimate(&cz, &cx, &cy, eps, eps, a);
        assert!(!est.degenerate);
        let tol = 2.0 / nf * (eps).exp() / calibration_d(eps, a);
        assert_abs_diff_eq!(est.value.x, v.x, epsilon = tol);
        assert_abs_diff_eq!(est.value.y, v.y, epsilon = tol);
        assert_abs_diff_eq!(est.value.z, v.z, epsilon = tol);
    }

    #[test]
    fn draw_respects_totals() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let p = stage_probs_weak_z(0.2, 0.7, 0.4);
        for n in [0, 1, 30, 1000] {
            let c = OutcomeCounts::draw(&p, n, &mut rng);
            assert_eq!(c.n_total(), n);
        }
        let certain = StageProbabilities { p_plus: 1.0, p_minus: 0.0, p_discard: 0.0 };
        assert_eq!(OutcomeCounts::draw(&certain, 30, &mut rng), OutcomeCounts::new(30, 0, 0));
    }

    #[test]
    fn estimator_names_parse() {
        assert_eq!("calibrated".parse::<WeakEstimator>().unwrap(), WeakEstimator::Calibrated);
        assert_eq!("conditional".parse::<WeakEstimator>().unwrap(), WeakEstimator::Conditional);
        assert!("mle".parse::<WeakEstimator>().is_err());
    }
}
