//! Randomized invariants.

use std::sync::Arc;

use bwave::functionals::*;
use bwave::spectral::*;
use proptest::prelude::*;

fn grid() -> Arc<Grid<f64>> {
    make_grid(2, &[16, 16], &[4.0, 3.0]).unwrap()
}

/// Smooth real field built from a handful of low modes.
fn field_from(coeffs: &[(i32, i32, f64, f64)]) -> Field<f64> {
    let g = grid();
    let (kx, ky) = (std::f64::consts::PI / 4.0, std::f64::consts::PI / 3.0);
    Field::from_fn(g, |x| {
        coeffs.iter().fold(0.0, |s, &(a, b, re, im)| {
            let ph = a as f64 * kx * x[0] + b as f64 * ky * x[1];
            s + re * ph.cos() + im * ph.sin()
        })
    })
    .unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<(i32, i32, f64, f64)>> {
    prop::collection::vec((-4i32..=4, -4i32..=4, -1.0f64..1.0, -1.0f64..1.0), 1..6)
}

fn speed() -> impl Strategy<Value = Vec<f64>> {
    (0.0f64..0.95, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| vec![r * t.cos(), r * t.sin()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval(c in coeffs()) {
        let u = field_from(&c);
        let direct = l2_norm2(&u);
        let spectral = u.fft().norm2();
        prop_assert!((direct - spectral).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn homogeneity(c in coeffs(), s in 0.1f64..3.0, v in speed(), p in 1.5f64..4.0) {
        let u = field_from(&c);
        let params = WaveParams::new(v, p).unwrap();
        let j = eval_j(&u, &params).unwrap();
        let k = eval_k(&u, p);
        prop_assert!((eval_j(&u.scale(s), &params).unwrap() - s * s * j).abs() <= 1e-11 * (s * s * j).abs().max(1.0));
        prop_assert!((eval_k(&u.scale(-s), p) - s.powf(p + 1.0) * k).abs() <= 1e-11 * (s.powf(p + 1.0) * k).max(1.0));
    }

    #[test]
    fn action_identity(cu in coeffs(), cv in coeffs(), v in speed()) {
        let (u, w) = (field_from(&cu), field_from(&cv));
        let params = WaveParams::new(v, 2.0).unwrap();
        let f = Functionals::new(u.grid(), &params).unwrap();
        // report() refuses to return when S = E + c·F = J - K + q fails
        let rep = f.report(&u, &w).unwrap();
        prop_assert!((rep.s - eval_s(&u, &w, &params).unwrap()).abs() <= 1e-12 * rep.s.abs().max(1.0));
        prop_assert!(rep.q >= 0.0);
    }

    #[test]
    fn multipliers_keep_fields_real(c in coeffs(), v in speed()) {
        let u = field_from(&c);
        let g = u.grid().clone();
        for s in [symbol_khat(&g, &v, ZeroModeRule::Zero), symbol_p(&g, &v, ZeroModeRule::AngularMean), symbol_lhalf(&g, &v)] {
            let m = apply_multiplier(&u, &s).unwrap();
            prop_assert!(m.values().iter().all(|x| x.is_finite()));
            prop_assert!(m.fft().hermitian_defect() <= 1e-12);
        }
    }

    #[test]
    fn dealias_is_idempotent_and_keeps_the_band(c in coeffs()) {
        let u = field_from(&c);
        let once = dealias(&u.fft());
        let twice = dealias(&once);
        prop_assert_eq!(once.values(), twice.values());
        let mask = dealias_mask(u.grid());
        let kept_before: f64 = u.fft().values().iter().zip(&mask).filter(|(_, &m)| m).map(|(z, _)| z.norm_sqr()).sum();
        let kept_after: f64 = once.values().iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((kept_before - kept_after).abs() <= 1e-12 * kept_before.max(1.0));
    }

    #[test]
    fn lattice_translation_is_a_roll(c in coeffs(), a in -8isize..8, b in -8isize..8) {
        let u = field_from(&c);
        let h = u.grid().spacings().to_vec();
        let moved = translate(&u.fft(), &[a as f64 * h[0], b as f64 * h[1]]).ifft().unwrap();
        let rolled = u.roll(&[a, b]);
        let err = moved.values().iter().zip(rolled.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12 * u.max_abs().max(1.0));
    }

    #[test]
    fn region_chain(n in 2usize..9, c in 0.01f64..0.99, p1 in 1.01f64..6.0, dp in 0.0f64..3.0) {
        let p2 = p1 + dp;
        // instability regions only grow with the exponent
        let t = threshold_p(c, n).unwrap();
        prop_assert!(p1 <= t || p2 > t);
        prop_assert!(strong_region(p2) >= strong_region(p1));
        prop_assert!(strong_region(p1) < 1.0);
        // and the speed threshold only grows with the speed
        let t_faster = threshold_p((c + 0.5 * (1.0 - c)).min(0.995), n).unwrap();
        prop_assert!(t_faster >= t);
        let lower = (1.0 - c * c).powf((p1 + 1.0) / (p1 - 1.0));
        prop_assert!(lower > 0.0 && lower < 1.0);
    }
}
