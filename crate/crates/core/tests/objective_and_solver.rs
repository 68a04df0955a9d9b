mod common;

use common::{abcd_power, eps, reference_spectrum};
use powerperm::objective::{objective_over, ObjectiveOptions};
use powerperm::{
    plan_window, reconstruct_window, sweep, window_objective, CircuitConfig, CoaxGeometry, Error,
    MaterialProfile, SolverConfig, SweepPlan, WindowProblem,
};
use proptest::prelude::*;

#[test]
fn objective_matches_oracle_sum_of_squares() {
    let truth = eps(3.0, 0.2);
    let measured = reference_spectrum(&MaterialProfile::Constant(truth));
    let probe = eps(3.1, 0.25);
    let window = plan_window(297.5e6, 95e6, 20).unwrap();
    let geom = CoaxGeometry::default();
    let circuit = CircuitConfig::default();
    let expected: f64 = window
        .samples()
        .iter()
        .map(|&f| {
            (abcd_power(f, &probe, &geom, &circuit, 64)
                - abcd_power(f, &truth, &geom, &circuit, 64))
            .powi(2)
        })
        .sum();
    let got = window_objective(&probe, &window, &measured, &geom, &circuit).unwrap();
    assert!(
        ((got - expected) / expected).abs() < 1e-6,
        "{got:e} vs {expected:e}"
    );
}

#[test]
fn window_must_lie_on_measured_grid() {
    let measured = reference_spectrum(&MaterialProfile::Constant(eps(2.0, 0.0)));
    let off = plan_window(99.0e6, 95e6, 20).unwrap();
    let err = WindowProblem::new(
        &off,
        &measured,
        &CoaxGeometry::default(),
        &CircuitConfig::default(),
        ObjectiveOptions::default(),
    );
    assert!(
        matches!(err, Err(Error::FrequencyNotOnGrid { .. })),
        "{err:?}"
    );
}

#[test]
fn sweep_rejects_plan_beyond_spectrum() {
    let measured = reference_spectrum(&MaterialProfile::Constant(eps(2.0, 0.0)));
    let plan = SweepPlan {
        band_end: 1100e6,
        ..SweepPlan::default()
    };
    let err = sweep(
        &measured,
        &plan,
        &CoaxGeometry::default(),
        &CircuitConfig::default(),
        &SolverConfig::default(),
    );
    assert!(
        matches!(err, Err(Error::PlanExceedsSpectrum { .. })),
        "{err:?}"
    );
}

#[test]
fn sequential_and_parallel_sweeps_agree_bitwise() {
    let measured = reference_spectrum(&MaterialProfile::Constant(eps(6.0, 0.4)));
    let plan = SweepPlan {
        band_end: 300e6,
        ..SweepPlan::default()
    };
    let geom = CoaxGeometry::default();
    let circuit = CircuitConfig::default();
    let par = sweep(&measured, &plan, &geom, &circuit, &SolverConfig::default()).unwrap();
    let seq = sweep(
        &measured,
        &plan,
        &geom,
        &circuit,
        &SolverConfig {
            parallel: false,
            ..SolverConfig::default()
        },
    )
    .unwrap();
    assert_eq!(par, seq);
    assert_eq!(par.len(), 16);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn objective_is_order_independent_and_zero_at_truth(
        re in 1.0..90.0f64,
        im in 0.0..50.0f64,
        probe_re in 1.0..90.0f64,
        probe_im in 0.0..50.0f64,
        k in 0usize..91,
        rotate in 0usize..20,
    ) {
        let truth = eps(re, im);
        let measured = reference_spectrum(&MaterialProfile::Constant(truth));
        let window = plan_window(97.5e6 + 10e6 * k as f64, 95e6, 20).unwrap();
        let geom = CoaxGeometry::default();
        let circuit = CircuitConfig::default();
        let opts = ObjectiveOptions::default();
        let mut shuffled = window.samples().to_vec();
        shuffled.rotate_left(rotate);
        shuffled.reverse();
        let probe = eps(probe_re, probe_im);
        let a = objective_over(&probe, window.samples(), &measured, &geom, &circuit, opts).unwrap();
        let b = objective_over(&probe, &shuffled, &measured, &geom, &circuit, opts).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        prop_assert_eq!(objective_over(&truth, window.samples(), &measured, &geom, &circuit, opts).unwrap(), 0.0);
        let problem = WindowProblem::new(&window, &measured, &geom, &circuit, opts).unwrap();
        prop_assert!((problem.cost(&probe) - a).abs() <= 1e-12 * a.max(1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reconstruction_stays_in_bounds_and_recovers_truth(
        re in 1.5..60.0f64,
        im in 0.0..20.0f64,
        k in 0usize..91,
    ) {
        let truth = eps(re, im);
        let measured = reference_spectrum(&MaterialProfile::Constant(truth));
        let window = plan_window(97.5e6 + 10e6 * k as f64, 95e6, 20).unwrap();
        let config = SolverConfig::default();
        let r = reconstruct_window(&window, &measured, &CoaxGeometry::default(), &CircuitConfig::default(), &config).unwrap();
        prop_assert!(config.eps_real_bounds.contains(r.eps.eps_real()));
        prop_assert!(config.eps_imag_bounds.contains(r.eps.eps_imag()));
        prop_assert!(r.final_objective <= r.grid_objective);
        prop_assert!((r.eps.eps_real() - re).hypot(r.eps.eps_imag() - im) < 1e-3, "{:?}", r);
    }
}
