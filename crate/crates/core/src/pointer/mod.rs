//! Gaussian-pointer (von Neumann) measurement of a Pauli observable.
//!
//! The pointer starts as a Gaussian wavepacket of spread 1/√ε and is shifted
//! by ±1 according to the measured eigenvalue, so a reading `q` is drawn from
//! an equal-variance two-Gaussian mixture centred on ±1 with variance 1/ε.
//! Readings inside the discard window `[-a, a]` carry no verdict, but the
//! measured copy is kept.

mod erf;

pub use self::erf::{erf, erfc};

use crate::bloch::{BlochVector, PauliAxis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PointerError {
    #[error("coupling strength must be finite and > 0, got {0}")]
    BadEpsilon(f64),
    #[error("discard half-width must be finite and >= 0, got {0}")]
    BadDiscard(f64),
}

/// Coupling strength and discard half-width for one weak measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointerConfig {
    epsilon: f64,
    discard_a: f64,
}

impl PointerConfig {
    pub fn new(epsilon: f64, discard_a: f64) -> Result<Self, PointerError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(PointerError::BadEpsilon(epsilon));
        }
        if !(discard_a.is_finite() && discard_a >= 0.0) {
            return Err(PointerError::BadDiscard(discard_a));
        }
        Ok(Self { epsilon, discard_a })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn discard_a(&self) -> f64 {
        self.discard_a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
    Discard,
}

/// Outcome probabilities of a single measurement stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageProbabilities {
    pub p_plus: f64,
    pub p_minus: f64,
    pub p_discard: f64,
}

impl StageProbabilities {
    pub fn sum(&self) -> f64 {
        self.p_plus + self.p_minus + self.p_discard
    }
}

/// Draws a pointer reading for `axis` on `state`.
pub fn sample_pointer_reading<R: Rng + ?Sized>(
    state: BlochVector,
    axis: PauliAxis,
    cfg: PointerConfig,
    rng: &mut R,
) -> f64 {
    let p_plus = 0.5 * (1.0 + state.component(axis));
    let centre = if rng.random::<f64>() < p_plus { 1.0 } else { -1.0 };
    let noise: f64 = rng.sample(StandardNormal);
    centre + noise / cfg.epsilon.sqrt()
}

/// Maps a reading to a verdict. The discard window is closed: |q| = a discards.
pub fn classify(q: f64, cfg: PointerConfig) -> Outcome {
    if q > cfg.discard_a {
        Outcome::Plus
    } else if q < -cfg.discard_a {
        Outcome::Minus
    } else {
        Outcome::Discard
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

/// State of a copy after the pointer for `axis` was read out at `q`.
///
/// With weights w± = e^{−ε(q∓1)²/2} the component along the axis becomes
/// (w₊(1+c) − w₋(1−c)) / (w₊(1+c) + w₋(1−c)) and both transverse components
/// are scaled by 2√(w₊w₋) / (w₊(1+c) + w₋(1−c)). Evaluated in log space,
/// using w₊/w₋ = e^{2εq}, so strong couplings do not underflow.
pub fn kraus_update(state: BlochVector, axis: PauliAxis, epsilon: f64, q: f64) -> BlochVector {
    let (along, t1, t2) = state.split(axis);
    let t = epsilon * q;
    let log_plus = t + (1.0 + along).max(0.0).ln();
    let log_minus = -t + (1.0 - along).max(0.0).ln();
    let log_norm = log_add_exp(log_plus, log_minus);
    assert!(
        log_norm.is_finite(),
        "degenerate Kraus normalisation for state {state} at q = {q}"
    );
    let plus = (log_plus - log_norm).exp();
    let minus = (log_minus - log_norm).exp();
    let (t1, t2) = if t1 == 0.0 && t2 == 0.0 {
        (0.0, 0.0)
    } else {
        let scale = 2.0 * (-log_norm).exp();
        (t1 * scale, t2 * scale)
    };
    BlochVector::join(axis, plus - minus, t1, t2)
}

/// Reading-averaged state after the measurement: transverse components damp by e^{−ε/2}.
pub fn unconditional_update(state: BlochVector, axis: PauliAxis, epsilon: f64) -> BlochVector {
    let (along, t1, t2) = state.split(axis);
    let damping = damping_factor(epsilon);
    BlochVector::join(axis, along, t1 * damping, t2 * damping)
}

/// e^{−ε/2}, the overlap of the two shifted pointer wavepackets.
pub fn damping_factor(epsilon: f64) -> f64 {
    (-epsilon / 2.0).exp()
}

fn weak_stage_probs_with<F: Fn(f64) -> f64>(
    erf_fn: &F,
    signal: f64,
    epsilon: f64,
    a: f64,
) -> StageProbabilities {
    let s = (epsilon / 2.0).sqrt();
    let inner = erf_fn((a - 1.0) * s);
    let outer = erf_fn((a + 1.0) * s);
    let erfc_inner = 1.0 - inner;
    let erfc_outer = 1.0 - outer;
    StageProbabilities {
        p_plus: 0.25 * ((1.0 + signal) * erfc_inner + (1.0 - signal) * erfc_outer),
        p_minus: 0.25 * ((1.0 - signal) * erfc_inner + (1.0 + signal) * erfc_outer),
        p_discard: 0.5 * (inner + outer),
    }
}

/// Closed-form probabilities of a weak σz stage on a fresh copy.
pub fn stage_probs_weak_z(z: f64, eps1: f64, a: f64) -> StageProbabilities {
    weak_stage_probs_with(&erf, z, eps1, a)
}

/// Weak σx stage run after a σz stage of strength `eps1`.
pub fn stage_probs_weak_x(x: f64, eps1: f64, eps2: f64, a: f64) -> StageProbabilities {
    weak_stage_probs_with(&erf, x * damping_factor(eps1), eps2, a)
}

/// Projective σy after the two weak stages.
pub fn stage_probs_projective_y(y: f64, eps1: f64, eps2: f64) -> StageProbabilities {
    projective_probs(y * (-(eps1 + eps2) / 2.0).exp())
}

/// Weak stage for a component whose expectation has already been damped to `signal`.
pub fn stage_probs_weak(signal: f64, epsilon: f64, a: f64) -> StageProbabilities {
    weak_stage_probs_with(&erf, signal, epsilon, a)
}

/// Weak stage evaluated with a caller-supplied error function (fault injection in validation).
pub fn stage_probs_weak_using<F: Fn(f64) -> f64>(
    erf_fn: &F,
    signal: f64,
    epsilon: f64,
    a: f64,
) -> StageProbabilities {
    weak_stage_probs_with(erf_fn, signal, epsilon, a)
}

/// Ideal two-outcome measurement of a component with expectation `signal`.
pub fn projective_probs(signal: f64) -> StageProbabilities {
    StageProbabilities {
        p_plus: 0.5 * (1.0 + signal),
        p_minus: 0.5 * (1.0 - signal),
        p_discard: 0.0,
    }
}

/// Density of a reading under the pointer mixture for a component value `c`.
pub fn reading_density(q: f64, c: f64, epsilon: f64) -> f64 {
    let norm = (epsilon / (2.0 * std::f64::consts::PI)).sqrt();
    let plus = (-epsilon * (q - 1.0).powi(2) / 2.0).exp();
    let minus = (-epsilon * (q + 1.0).powi(2) / 2.0).exp();
    norm * (0.5 * (1.0 + c) * plus + 0.5 * (1.0 - c) * minus)
}
