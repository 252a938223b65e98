//! Error function, after the rational approximations of FreeBSD msun
//! `s_erf.c`:
//!
//! ====================================================
//! Copyright (C) 1993 by Sun Microsystems, Inc. All rights reserved.
//!
//! Developed at SunPro, a Sun Microsystems, Inc. business.
//! Permission to use, copy, modify, and distribute this
//! software is freely granted, provided that this notice
//! is preserved.
//! ====================================================
//!
//! Error is below one ulp of erf on the whole real line.

#![allow(clippy::excessive_precision)]

const ERX: f64 = 8.45062911510467529297e-01;
const EFX: f64 = 1.28379167095512586316e-01;

// |x| < 0.84375
const PP: [f64; 5] = [
    1.28379167095512558561e-01,
    -3.25042107247001499370e-01,
    -2.84817495755985104766e-02,
    -5.77027029648944159157e-03,
    -2.37630166566501626084e-05,
];
const QQ: [f64; 6] = [
    1.0,
    3.97917223959155352819e-01,
    6.50222499887672944485e-02,
    5.08130628187576562776e-03,
    1.32494738004321644526e-04,
    -3.96022827877536812320e-06,
];

// 0.84375 <= |x| < 1.25
const PA: [f64; 7] = [
    -2.36211856075265944077e-03,
    4.14856118683748331666e-01,
    -3.72207876035701323847e-01,
    3.18346619901161753674e-01,
    -1.10894694282396677476e-01,
    3.54783043256182359371e-02,
    -2.16637559486879084300e-03,
];
const QA: [f64; 7] = [
    1.0,
    1.06420880400844228286e-01,
    5.40397917702171048937e-01,
    7.18286544141962662868e-02,
    1.26171219808761642112e-01,
    1.36370839120290507362e-02,
    1.19844998467991074170e-02,
];

// 1.25 <= |x| < 1/0.35
const RA: [f64; 8] = [
    -9.86494403484714822705e-03,
    -6.93858572707181764372e-01,
    -1.05586262253232909814e+01,
    -6.23753324503260060396e+01,
    -1.62396669462573470355e+02,
    -1.84605092906711035994e+02,
    -8.12874355063065934246e+01,
    -9.81432934416914548592e+00,
];
const SA: [f64; 9] = [
    1.0,
    1.96512716674392571292e+01,
    1.37657754143519042600e+02,
    4.34565877475229228821e+02,
    6.45387271733267880336e+02,
    4.29008140027567833386e+02,
    1.08635005541779435134e+02,
    6.57024977031928170135e+00,
    -6.04244152148580987438e-02,
];

// 1/0.35 <= |x| < 6
const RB: [f64; 7] = [
    -9.86494292470009928597e-03,
    -7.99283237680523006574e-01,
    -1.77579549177547519889e+01,
    -1.60636384855821916062e+02,
    -6.37566443368389627722e+02,
    -1.02509513161107724954e+03,
    -4.83519191608651397019e+02,
];
const SB: [f64; 8] = [
    1.0,
    3.03380607434824582924e+01,
    3.25792512996573918826e+02,
    1.53672958608443695994e+03,
    3.19985821950859553908e+03,
    2.55305040643316442583e+03,
    4.74528541206955367215e+02,
    -2.24409524465858183362e+01,
];

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// erf(x) = (2/√π) ∫₀ˣ e^{−t²} dt.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    let magnitude = if ax < 0.84375 {
        if ax < 3.7252902984619140625e-9 {
            ax + EFX * ax
        } else {
            let t = ax * ax;
            ax + ax * (horner(&PP, t) / horner(&QQ, t))
        }
    } else if ax < 1.25 {
        let s = ax - 1.0;
        ERX + horner(&PA, s) / horner(&QA, s)
    } else if ax >= 6.0 {
        1.0
    } else {
        let t = 1.0 / (ax * ax);
        let (r, s) = if ax < 1.0 / 0.35 {
            (horner(&RA, t), horner(&SA, t))
        } else {
            (horner(&RB, t), horner(&SB, t))
        };
        // split ax so that exp(-ax²) keeps full precision
        let hi = f64::from_bits(ax.to_bits() & 0xffff_ffff_0000_0000);
        let tail = (-hi * hi - 0.5625).exp() * ((hi - ax) * (hi + ax) + r / s).exp();
        1.0 - tail / ax
    };
    magnitude.copysign(x)
}

/// erfc(x) = 1 − erf(x).
pub fn erfc(x: f64) -> f64 {
    1.0 - erf(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Composite Gauss–Legendre (5 point) quadrature of (2/√π) e^{−t²} on [0, x].
    fn erf_quadrature(x: f64) -> f64 {
        const NODES: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let panels = 2000;
        let h = x / panels as f64;
        let mut sum = 0.0;
        for k in 0..panels {
            let mid = (k as f64 + 0.5) * h;
            for (n, w) in NODES.iter().zip(WEIGHTS) {
                let t = mid + 0.5 * h * n;
                sum += w * (-t * t).exp();
            }
        }
        sum * 0.5 * h * 2.0 / std::f64::consts::PI.sqrt()
    }

    #[test]
    fn erf_at_zero_and_infinity() {
        assert_eq!(erf(0.0), 0.0);
        assert_eq!(erfc(0.0), 1.0);
        assert_eq!(erf(f64::INFINITY), 1.0);
        assert_eq!(erf(f64::NEG_INFINITY), -1.0);
        assert!(erf(f64::NAN).is_nan());
    }

    #[test]
    fn erf_one_sigma() {
        let oracle = erf_quadrature(0.5f64.sqrt());
        assert!((oracle - 0.682_689_492_137_085_9).abs() < 1e-14);
        assert!((erf(0.5f64.sqrt()) - oracle).abs() < 1e-14);
    }

    #[test]
    fn erf_matches_quadrature_across_branches() {
        for &x in &[1e-10, 0.1, 0.3, 0.84, 0.85, 1.0, 1.24, 1.26, 2.0, 2.85, 2.86, 3.5, 5.0, 5.99, 6.5] {
            let oracle = erf_quadrature(x);
            assert!((erf(x) - oracle).abs() < 1e-13, "x={x}: {} vs {}", erf(x), oracle);
            assert!((erf(-x) + oracle).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn erf_is_odd(x in -10.0f64..10.0) {
            prop_assert_eq!(erf(-x), -erf(x));
        }

        #[test]
        fn erfc_reflection(x in -10.0f64..10.0) {
            prop_assert!((erfc(-x) + erfc(x) - 2.0).abs() <= 1e-15);
        }

        #[test]
        fn erf_bounded_and_monotone(x in -8.0f64..8.0, dx in 0.0f64..1.0) {
            prop_assert!(erf(x).abs() <= 1.0);
            prop_assert!(erf(x + dx) >= erf(x));
        }
    }
}
