mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use evopoisson::control::spsa_quotient;
use evopoisson::{
    optimize_exact, optimize_revenue, revenue, revenue_concavity, run_on_game, run_two_timescale, spsa_gradient,
    ControlMode, ControllerSettings, FnRevenue, StepSchedule,
};

#[test]
fn revenue_is_single_peaked_on_reference_model() {
    let e = common::fig5();
    let n = 2_000;
    let values: Vec<f64> = (0..=n).map(|i| revenue(&e, 10.0 * i as f64 / n as f64).unwrap()).collect();
    let best = values.iter().enumerate().fold(0, |b, (i, &v)| if v > values[b] { i } else { b });
    assert!(best > 0 && best < n);
    assert!(values[..=best].windows(2).all(|w| w[1] >= w[0]));
    assert!(values[best..].windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn optimizer_agrees_with_fine_scan() {
    let e = common::fig5();
    let opt = optimize_revenue(&e, 1e-8).unwrap();
    let n = 10_000;
    let (c_scan, r_scan) = (0..=n)
        .map(|i| {
            let c = 10.0 * i as f64 / n as f64;
            (c, revenue(&e, c).unwrap())
        })
        .fold((0.0, f64::MIN), |b, x| if x.1 > b.1 { x } else { b });
    assert!((opt.price - c_scan).abs() <= 1e-3, "{} vs {c_scan}", opt.price);
    assert!(opt.revenue >= r_scan - 1e-9);
}

#[test]
fn revenue_tail_is_concave() {
    let e = common::fig5();
    let report = revenue_concavity(&e, 5.0, 10.0, 200).unwrap();
    assert!(report.tail_concave);
    assert_eq!(report.failures, 0, "{:?}", report.c0);
    assert!(report.upper < 10.0);
    assert!(revenue_concavity(&e, 5.0, 5.0, 200).is_err());
}

#[test]
fn spsa_branches_average_to_central_difference() {
    let f = |c: f64| c * c * c;
    let (c, d) = (1.0, 0.1);
    let plus = spsa_quotient(f(c + d), f(c), d, 1);
    let minus = spsa_quotient(f(c - d), f(c), d, -1);
    let central = (f(c + d) - f(c - d)) / (2.0 * d);
    assert!(((plus + minus) / 2.0 - central).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = spsa_gradient(|c: f64| Ok(c * c), 1.0, 0.1, &mut rng).unwrap();
    assert!((g - 2.1).abs() < 1e-12 || (g - 1.9).abs() < 1e-12);
}

#[test]
fn monotone_hook_returns_endpoint() {
    let opt = optimize_exact(|c: f64| Ok(3.0 * c), 10.0, 1e-9).unwrap();
    assert!((opt.price - 10.0).abs() < 1e-6);
}

#[test]
fn seeded_runs_are_bit_identical() {
    let e = common::fig6();
    for mode in [ControlMode::Coupled, ControlMode::Nested] {
        let mut s = ControllerSettings::for_cost(10.0, StepSchedule::inv_n_log_n(), mode, 42);
        s.n_outer = 40;
        let a = run_on_game(&e, &s, 0.5, 1e-8, 1_000_000).unwrap();
        let b = run_on_game(&e, &s, 0.5, 1e-8, 1_000_000).unwrap();
        assert_eq!(a, b);
        s.seed = 43;
        let c = run_on_game(&e, &s, 0.5, 1e-8, 1_000_000).unwrap();
        assert_ne!(a.trace, c.trace);
    }
}

#[test]
fn prices_stay_in_range() {
    for schedule in [StepSchedule::inv_n(), StepSchedule::constant(1.0), StepSchedule::inv_n_sq()] {
        let mut oracle = FnRevenue::new(|c: f64| 100.0 * c, 10.0);
        let mut s = ControllerSettings::for_cost(10.0, schedule, ControlMode::Coupled, 5);
        s.n_outer = 500;
        let state = run_two_timescale(&mut oracle, &s).unwrap();
        assert!(state.trace.iter().all(|st| st.price.abs() <= 10.0));
        assert!(state.price <= 10.0 - s.delta + 1e-12);
    }
}

#[test]
fn coupled_controller_finds_optimal_price() {
    let e = common::fig6();
    let target = optimize_revenue(&e, 1e-8).unwrap().price;
    let mut s = ControllerSettings::for_cost(10.0, StepSchedule::inv_n_log_n(), ControlMode::Coupled, 9);
    s.n_outer = 30_000;
    let state = run_on_game(&e, &s, 0.5, 1e-8, 1_000_000).unwrap();
    assert!((state.price - target).abs() < 0.5, "{} vs {target}", state.price);
    assert!(state.trace.iter().all(|st| st.population.is_some()));
}
