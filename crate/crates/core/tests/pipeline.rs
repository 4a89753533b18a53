//! End-to-end checks of the decomposition pipeline at moderate viscosity.

use couette_core::channel::ChannelOperator;
use couette_core::data::{DataClass, InitialData};
use couette_core::experiments::{corrector_fields, decomposition_errors, ed_time, run_criterion, SuiteConfig};
use couette_core::field::YGrid;
use couette_core::gain::GAIN_CONSTANT;
use couette_core::weights::{epsilon, wall_distance, RateSpec, WeightSpec, WeightFamily};

#[test]
fn decomposition_matches_direct_solver_at_moderate_viscosity() {
    let cfg = SuiteConfig::default();
    for (t, e) in decomposition_errors(&cfg, 1.0, 1e-2).unwrap() {
        assert!(e < 1e-6, "t = {t}: relative error {e}");
    }
}

#[test]
fn corrector_mass_decays_away_from_the_walls() {
    let (alpha, nu) = (1.0, 1e-3);
    let data = InitialData::generate(DataClass::Separated { delta0: 0.5 }, alpha, 2);
    let grid = YGrid::chebyshev(ChannelOperator::min_resolution(alpha, nu).max(256));
    let (wb, _) = corrector_fields(&data, alpha, nu, &grid, &[ed_time(alpha, nu)]).unwrap();
    let eps = epsilon(alpha, nu);
    let beyond = |m: f64| -> f64 {
        grid.nodes.iter().zip(&grid.weights).zip(&wb[0].values).filter(|((&y, _), _)| wall_distance(y) > m * eps).map(|((_, w), v)| w * v.norm()).sum()
    };
    let c_star = WeightSpec::new(WeightFamily::EtaP, 1.0, eps).c_star;
    let f1 = beyond(1.0);
    let mut prev = f1;
    for m in [2.0, 3.0, 4.0, 5.0] {
        let f = beyond(m);
        assert!(f <= prev, "mass beyond {m}ε grew");
        assert!(f <= f1 * (-c_star * (m * m.sqrt() - 1.0)).exp(), "M = {m}: {f} vs {f1}");
        prev = f;
    }
}

#[test]
fn fast_criteria_pass_on_defaults() {
    let cfg = SuiteConfig::default();
    for id in [4, 9] {
        let r = run_criterion(id, &cfg).unwrap();
        assert!(r.pass, "criterion {id}: {}", r.summary);
        assert!(!r.rows.is_empty());
    }
}

#[test]
fn tolerances_drive_the_verdict() {
    let mut cfg = SuiteConfig::default();
    cfg.tol.gain_constant = 1.5;
    let r = run_criterion(9, &cfg).unwrap();
    assert!(!r.pass);
    assert!(GAIN_CONSTANT > 1.5);
}

#[test]
fn unknown_criterion_is_an_error() {
    assert!(run_criterion(0, &SuiteConfig::default()).is_err());
    assert!(run_criterion(11, &SuiteConfig::default()).is_err());
}

#[test]
fn suite_config_round_trips_and_rejects_unknown_keys() {
    let cfg = SuiteConfig { rate: RateSpec { kappa: 0.2, delta: 0.03 }, ..SuiteConfig::default() };
    let text = serde_json::to_string(&cfg).unwrap();
    let back: SuiteConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back.rate, cfg.rate);
    let bad = text.replacen("\"seed\"", "\"sead\"", 1);
    assert!(serde_json::from_str::<SuiteConfig>(&bad).is_err());
}
