//! Single-qubit state algebra: Bloch vectors, 2x2 density matrices and the
//! squared-distance fidelity used to score estimates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Slack allowed on |n|² ≤ 1 for a vector to count as physical.
pub const BALL_TOLERANCE: f64 = 1e-9;

const HERMITIAN_TOLERANCE: f64 = 1e-12;
const TRACE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlochError {
    #[error("density matrix is not Hermitian (|rho10 - conj(rho01)| = {0:e})")]
    NotHermitian(f64),
    #[error("density matrix trace is {0}, expected 1")]
    BadTrace(f64),
}

/// Pauli measurement axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];
}

impl fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PauliAxis::X => "X",
            PauliAxis::Y => "Y",
            PauliAxis::Z => "Z",
        };
        f.write_str(s)
    }
}

/// A qubit state as the vector of Pauli expectations (⟨σx⟩, ⟨σy⟩, ⟨σz⟩).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ORIGIN: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// True when the vector lies in the closed unit ball (within [`BALL_TOLERANCE`]).
    pub fn is_physical(&self) -> bool {
        self.x.is_finite()
            && self.y.is_finite()
            && self.z.is_finite()
            && self.norm_sqr() <= 1.0 + BALL_TOLERANCE
    }

    pub fn component(&self, axis: PauliAxis) -> f64 {
        match axis {
            PauliAxis::X => self.x,
            PauliAxis::Y => self.y,
            PauliAxis::Z => self.z,
        }
    }

    /// Splits the vector into the component along `axis` and the two
    /// transverse components, in a fixed cyclic order.
    pub(crate) fn split(&self, axis: PauliAxis) -> (f64, f64, f64) {
        match axis {
            PauliAxis::X => (self.x, self.y, self.z),
            PauliAxis::Y => (self.y, self.z, self.x),
            PauliAxis::Z => (self.z, self.x, self.y),
        }
    }

    /// Inverse of [`BlochVector::split`].
    pub(crate) fn join(axis: PauliAxis, along: f64, t1: f64, t2: f64) -> Self {
        match axis {
            PauliAxis::X => Self::new(along, t1, t2),
            PauliAxis::Y => Self::new(t2, along, t1),
            PauliAxis::Z => Self::new(t1, t2, along),
        }
    }
}

impl fmt::Display for BlochVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// An estimate of a Bloch vector. Estimates are not confined to the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EstimateVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl EstimateVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn component(&self, axis: PauliAxis) -> f64 {
        match axis {
            PauliAxis::X => self.x,
            PauliAxis::Y => self.y,
            PauliAxis::Z => self.z,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<BlochVector> for EstimateVector {
    fn from(v: BlochVector) -> Self {
        Self::new(v.x, v.y, v.z)
    }
}

/// 2x2 density matrix in the computational basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    pub rho00: Complex64,
    pub rho01: Complex64,
    pub rho10: Complex64,
    pub rho11: Complex64,
}

impl DensityMatrix {
    pub fn trace(&self) -> Complex64 {
        self.rho00 + self.rho11
    }

    /// Tr(ρ²).
    pub fn purity(&self) -> f64 {
        (self.rho00 * self.rho00
            + self.rho01 * self.rho10
            + self.rho10 * self.rho01
            + self.rho11 * self.rho11)
            .re
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.rho00.re + self.rho11.re);
        let half_diff = 0.5 * (self.rho00.re - self.rho11.re);
        let radius = (half_diff * half_diff + self.rho01.norm_sqr()).sqrt();
        [mean - radius, mean + radius]
    }
}

/// ρ = ½(I + n·σ). Physicality of `n` is not checked.
pub fn density_from_bloch(n: BlochVector) -> DensityMatrix {
    DensityMatrix {
        rho00: Complex64::new((1.0 + n.z) / 2.0, 0.0),
        rho01: Complex64::new(n.x / 2.0, -n.y / 2.0),
        rho10: Complex64::new(n.x / 2.0, n.y / 2.0),
        rho11: Complex64::new((1.0 - n.z) / 2.0, 0.0),
    }
}

/// Reads the Bloch vector back out of a Hermitian, unit-trace matrix.
pub fn bloch_from_density(rho: &DensityMatrix) -> Result<BlochVector, BlochError> {
    let skew = (rho.rho10 - rho.rho01.conj())
        .norm()
        .max(rho.rho00.im.abs())
        .max(rho.rho11.im.abs());
    if skew > HERMITIAN_TOLERANCE {
        return Err(BlochError::NotHermitian(skew));
    }
    let trace = rho.trace().re;
    if (trace - 1.0).abs() > TRACE_TOLERANCE {
        return Err(BlochError::BadTrace(trace));
    }
    Ok(BlochVector::new(
        2.0 * rho.rho01.re,
        -2.0 * rho.rho01.im,
        rho.rho00.re - rho.rho11.re,
    ))
}

/// Pure state cos(α/2)|0⟩ + sin(α/2)|1⟩ in the x–z plane.
pub fn pure_from_polar(alpha: f64) -> BlochVector {
    BlochVector::new(alpha.sin(), 0.0, alpha.cos())
}

pub fn component(n: BlochVector, axis: PauliAxis) -> f64 {
    n.component(axis)
}

/// f = 1 − |n − n_est|². Equals 1 only for a perfect estimate and can go negative.
pub fn fidelity(truth: BlochVector, est: EstimateVector) -> f64 {
    let dx = truth.x - est.x;
    let dy = truth.y - est.y;
    let dz = truth.z - est.z;
    1.0 - (dx * dx + dy * dy + dz * dz)
}

/// Built-in test states used by the demo experiments.
pub mod states {
    use super::BlochVector;

    pub const RHO1: BlochVector = BlochVector::new(-0.385, -0.042, 0.397);
    pub const RHO2: BlochVector = BlochVector::new(-0.601, 0.398, 0.055);

    pub fn by_name(name: &str) -> Option<BlochVector> {
        match name {
            "rho1" => Some(RHO1),
            "rho2" => Some(RHO2),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn density_of_basis_and_mixed_states() {
        let up = density_from_bloch(BlochVector::new(0.0, 0.0, 1.0));
        assert_eq!(up.rho00, c(1.0, 0.0));
        assert_eq!(up.rho11, c(0.0, 0.0));
        assert_eq!(up.rho01, c(0.0, 0.0));

        let mixed = density_from_bloch(BlochVector::ORIGIN);
        assert_eq!(mixed.rho00, c(0.5, 0.0));
        assert_eq!(mixed.rho11, c(0.5, 0.0));
    }

    #[test]
    fn density_of_rho1() {
        let rho = density_from_bloch(states::RHO1);
        assert_abs_diff_eq!(rho.rho00.re, 1.397 / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.rho11.re, 0.603 / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.rho01.re, -0.385 / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.rho01.im, 0.042 / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.rho10.im, -0.042 / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn bloch_of_rho2_matrix() {
        let rho = DensityMatrix {
            rho00: c(1.055 / 2.0, 0.0),
            rho01: c(-0.601 / 2.0, -0.398 / 2.0),
            rho10: c(-0.601 / 2.0, 0.398 / 2.0),
            rho11: c(0.945 / 2.0, 0.0),
        };
        let n = bloch_from_density(&rho).unwrap();
        assert_abs_diff_eq!(n.x, -0.601, epsilon = 1e-12);
        assert_abs_diff_eq!(n.y, 0.398, epsilon = 1e-12);
        assert_abs_diff_eq!(n.z, 0.055, epsilon = 1e-12);

        let origin = bloch_from_density(&density_from_bloch(BlochVector::ORIGIN)).unwrap();
        assert_eq!(origin, BlochVector::ORIGIN);
    }

    #[test]
    fn rejects_non_hermitian_and_bad_trace() {
        let mut rho = density_from_bloch(BlochVector::new(0.1, 0.2, 0.3));
        rho.rho10 = c(0.5, 0.5);
        assert!(matches!(bloch_from_density(&rho), Err(BlochError::NotHermitian(_))));

        let mut rho = density_from_bloch(BlochVector::new(0.1, 0.2, 0.3));
        rho.rho00 = c(0.9, 0.0);
        assert!(matches!(bloch_from_density(&rho), Err(BlochError::BadTrace(_))));
    }

    #[test]
    fn polar_states() {
        assert_eq!(pure_from_polar(0.0), BlochVector::new(0.0, 0.0, 1.0));
        let south = pure_from_polar(PI);
        assert_abs_diff_eq!(south.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(south.z, -1.0, epsilon = 1e-15);
        let east = pure_from_polar(PI / 2.0);
        assert_abs_diff_eq!(east.x, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(east.z, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn components() {
        let v = BlochVector::new(1.0, 2.0, 3.0);
        assert_eq!(component(v, PauliAxis::Z), 3.0);
        assert_eq!(component(states::RHO1, PauliAxis::X), -0.385);
        assert_eq!(component(states::RHO2, PauliAxis::Y), 0.398);
    }

    #[test]
    fn fidelity_values() {
        let v = BlochVector::new(0.3, -0.2, 0.1);
        assert_eq!(fidelity(v, v.into()), 1.0);
        // |rho1|² = 0.148225 + 0.001764 + 0.157609
        let expected = 1.0 - 0.307598;
        assert_abs_diff_eq!(fidelity(states::RHO1, EstimateVector::default()), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(states::RHO1.norm(), 0.555, epsilon = 1e-3);
        assert_abs_diff_eq!(states::RHO2.norm(), 0.723, epsilon = 1e-3);
        assert_eq!(
            fidelity(BlochVector::new(0.0, 0.0, 1.0), EstimateVector::new(0.0, 0.0, -1.0)),
            -3.0
        );
    }

    #[test]
    fn split_join_round_trip() {
        let v = BlochVector::new(0.1, 0.2, 0.3);
        for axis in PauliAxis::ALL {
            let (a, t1, t2) = v.split(axis);
            assert_eq!(a, v.component(axis));
            assert_eq!(BlochVector::join(axis, a, t1, t2), v);
        }
    }

    fn ball_vector() -> impl Strategy<Value = BlochVector> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("inside ball", |(x, y, z)| x * x + y * y + z * z <= 1.0)
            .prop_map(|(x, y, z)| BlochVector::new(x, y, z))
    }

    /// Rotation matrix from a unit quaternion built from four free parameters.
    fn rotation(q: [f64; 4]) -> [[f64; 3]; 3] {
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        let [w, x, y, z] = q.map(|v| v / n);
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]
    }

    fn rotate(r: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|i| r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn density_round_trip(v in ball_vector()) {
            let rho = density_from_bloch(v);
            prop_assert!((rho.trace().re - 1.0).abs() <= 1e-15);
            prop_assert_eq!(rho.trace().im, 0.0);
            prop_assert_eq!(rho.rho10, rho.rho01.conj());
            prop_assert!(rho.eigenvalues()[0] >= -1e-9);
            let back = bloch_from_density(&rho).unwrap();
            prop_assert!((back.x - v.x).abs() <= 1e-12);
            prop_assert!((back.y - v.y).abs() <= 1e-12);
            prop_assert!((back.z - v.z).abs() <= 1e-12);
        }

        #[test]
        fn purity_matches_norm(v in ball_vector()) {
            let rho = density_from_bloch(v);
            prop_assert!((rho.purity() - (1.0 + v.norm_sqr()) / 2.0).abs() <= 1e-12);
        }

        #[test]
        fn fidelity_symmetric_and_rotation_invariant(
            u in ball_vector(),
            v in ball_vector(),
            q in prop::array::uniform4(-1.0f64..1.0),
        ) {
            prop_assume!(q.iter().map(|x| x * x).sum::<f64>() > 1e-3);
            let f_uv = fidelity(u, v.into());
            let f_vu = fidelity(v, u.into());
            prop_assert!((f_uv - f_vu).abs() <= 1e-15);

            let r = rotation(q);
            let [ux, uy, uz] = rotate(&r, [u.x, u.y, u.z]);
            let [vx, vy, vz] = rotate(&r, [v.x, v.y, v.z]);
            let f_rot = fidelity(BlochVector::new(ux, uy, uz), EstimateVector::new(vx, vy, vz));
            prop_assert!((f_rot - f_uv).abs() <= 1e-10);
        }
    }

    #[test]
    fn round_trip_many_random_vectors() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100_000 {
            let v = loop {
                let v = BlochVector::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                if v.is_physical() {
                    break v;
                }
            };
            let back = bloch_from_density(&density_from_bloch(v)).unwrap();
            assert!((back.x - v.x).abs() <= 1e-12);
            assert!((back.y - v.y).abs() <= 1e-12);
            assert!((back.z - v.z).abs() <= 1e-12);
        }
    }
}
