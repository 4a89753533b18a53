//! Property tests for the structural invariants of the weights, the free
//! evolution, the synthetic data and the Evans integrals.

use couette_core::data::{DataClass, Gaussian, InitialData, Profile};
use couette_core::evans::evans_det;
use couette_core::free::{evolve_free, DecayEnvelope, LineField};
use couette_core::gain::{GainInequality, Limits, GAIN_CONSTANT};
use couette_core::resolvent::{LangerMap, QuadParams};
use couette_core::weights::{eval_weight, RateSpec, WeightFamily, WeightSpec};
use couette_core::C64;
use proptest::prelude::*;

const FAMILIES: [WeightFamily; 4] = [WeightFamily::EtaP, WeightFamily::EtaStarP, WeightFamily::EtaTilde, WeightFamily::EtaTildeIn];

fn weight_at(spec: &WeightSpec, d: f64) -> f64 {
    eval_weight(spec, -1.0 + d).unwrap()
}

proptest! {
    #[test]
    fn eta_1_is_at_least_one(eps in 0.01f64..0.6, y in -1.0f64..1.0) {
        let spec = WeightSpec::new(WeightFamily::EtaP, 1.0, eps);
        prop_assert!(eval_weight(&spec, y).unwrap() >= 1.0 - 1e-12);
    }

    #[test]
    fn weights_are_nondecreasing_up_to_breakpoint_factor(
        fam in 0usize..4,
        p in prop_oneof![Just(1.0f64), Just(2.0), Just(4.0), Just(f64::INFINITY)],
        eps in 0.01f64..0.5,
        d1 in 0.0f64..1.0,
        d2 in 0.0f64..1.0,
    ) {
        let spec = WeightSpec::new(FAMILIES[fam], p, eps);
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let slack = (-spec.c_star).exp() * (1.0 - 1e-12);
        prop_assert!(weight_at(&spec, hi) >= slack * weight_at(&spec, lo), "{:?} p={p} eps={eps} {lo} {hi}", FAMILIES[fam]);
    }

    #[test]
    fn weights_are_positive_except_initial_layer_at_wall(fam in 0usize..4, eps in 0.01f64..0.5, d in 1e-9f64..1.0) {
        let spec = WeightSpec::new(FAMILIES[fam], 2.0, eps);
        prop_assert!(weight_at(&spec, d) > 0.0);
        let at_wall = weight_at(&spec, 0.0);
        if FAMILIES[fam] == WeightFamily::EtaTildeIn {
            prop_assert_eq!(at_wall, 0.0);
        } else {
            prop_assert!(at_wall > 0.0);
        }
    }

    #[test]
    fn lambda_is_positive_and_monotone(a in 0.1f64..20.0, nu in 1e-6f64..1.0, da in 0.0f64..5.0, dn in 0.0f64..1.0) {
        let r = RateSpec::default();
        let l = r.lambda(a, nu);
        prop_assert!(l > 0.0);
        prop_assert!(r.lambda(a + da, nu) >= l);
        prop_assert!(r.lambda(a, nu + dn) >= l);
    }

    #[test]
    fn decay_envelope_is_a_nonincreasing_fraction(a in 0.1f64..10.0, nu in 1e-6f64..1.0, t in 0.0f64..1e3, dt in 0.0f64..1e3) {
        let e = DecayEnvelope { alpha: a, nu };
        let v = e.value(t);
        prop_assert!(v > 0.0 || t > 0.0);
        prop_assert!(v <= 1.0);
        prop_assert!(e.value(t + dt) <= v);
    }

    #[test]
    fn langer_variable_is_exact(a in 0.5f64..5.0, nu in 1e-5f64..1e-1, cr in -2.0f64..2.0, ci in -0.5f64..0.5, y in -1.0f64..1.0) {
        let c = C64::new(cr, ci);
        let m = LangerMap::new(a, nu, c).unwrap();
        let want = (C64::new(y, 0.0) - c - C64::new(0.0, a * nu)) / m.epsilon;
        prop_assert!((m.y(y) - want).norm() <= 1e-12 * want.norm().max(1.0));
        prop_assert!((m.epsilon - (nu / a).cbrt()).abs() < 1e-15);
    }

    #[test]
    fn gain_ratios_stay_below_recorded_constant(
        delta in 0.001f64..0.05,
        z in 0.0f64..30.0,
        which in 0usize..4,
    ) {
        let (sign, limits, zr) = match which {
            0 => (1.0, Limits::FromTo(0.0), z),
            1 => (1.0, Limits::UpTo(0.0), -z),
            2 => (-1.0, Limits::ToInfinity, z),
            _ => (-1.0, Limits::FromMinusInfinity, -z),
        };
        let r = GainInequality { r_i: delta, sign, limits }.ratio(zr);
        prop_assert!(r.is_finite() && r < GAIN_CONSTANT, "{r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn free_evolution_is_a_semigroup(s in 0.0f64..3.0, t in 0.0f64..3.0, nu in 1e-4f64..1e-1) {
        let g = Gaussian { sigma: 0.4 };
        let f = LineField::from_profile(&g, 1.0, 40.0, 2049).unwrap();
        let two = evolve_free(&evolve_free(&f, nu, s).unwrap(), nu, t).unwrap();
        let one = evolve_free(&f, nu, s + t).unwrap();
        let num: f64 = two.values.iter().zip(&one.values).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = one.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(num <= 1e-12 * den, "{}", num / den);
    }

    #[test]
    fn separated_data_is_supported_and_moment_free(seed in 0u64..1000, delta0 in 0.1f64..0.8, alpha in 0.5f64..4.0) {
        let d = InitialData::generate(DataClass::Separated { delta0 }, alpha, seed);
        let edge = 1.0 - delta0;
        prop_assert_eq!(d.eval(edge + 1e-9), C64::new(0.0, 0.0));
        prop_assert_eq!(d.eval(-edge - 1e-9), C64::new(0.0, 0.0));
        let m = d.moments();
        let scale = d.l1_norm() * alpha.exp();
        prop_assert!(m[0].norm() < 1e-12 * scale && m[1].norm() < 1e-12 * scale, "{m:?}");
    }

    #[test]
    fn evans_integrals_mirror_under_reflection(cr in -2.0f64..2.0, nu in 1e-4f64..1e-2) {
        let alpha = 1.0;
        let c_i = -alpha * nu - 0.05 * (nu / alpha).cbrt();
        let p = QuadParams::default();
        let a = evans_det(alpha, nu, C64::new(cr, c_i), &p).unwrap();
        let b = evans_det(alpha, nu, C64::new(-cr, c_i), &p).unwrap();
        let rel = (a.i_pp.ln_abs() - b.i_mm.ln_abs()).abs();
        prop_assert!(rel < 1e-8, "ln|I++(c_r)| - ln|I--(-c_r)| = {rel}");
        let rel = (a.i_pm.ln_abs() - b.i_mp.ln_abs()).abs();
        prop_assert!(rel < 1e-8, "ln|I+-(c_r)| - ln|I-+(-c_r)| = {rel}");
    }
}
