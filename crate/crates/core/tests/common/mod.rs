#![allow(dead_code)]

use evopoisson::{Convention, PayoffEngine, PlayerType, PopulationModel, Rate};

pub fn two_type(lambda: f64, r1: f64, tau1: f64, c: f64, conv: Option<Convention>) -> PayoffEngine<f64> {
    let m = PopulationModel::from_spreading_rates(
        lambda,
        &[r1, 1.0 - r1],
        &[Rate::decimal(tau1).unwrap(), Rate::decimal(0.2).unwrap()],
        5.0,
        c,
        conv,
    )
    .unwrap();
    PayoffEngine::new(m).unwrap()
}

/// r = (0.1, 0.9), tau = (0.05, 0.2), C = 4, K = 5.
pub fn fig4(lambda: f64) -> PayoffEngine<f64> {
    two_type(lambda, 0.1, 0.05, 4.0, None)
}

/// tau = (0.5, 0.98), r = (0.3, 0.7), K = 10, lambda = 10.
pub fn fig5() -> PayoffEngine<f64> {
    let m = PopulationModel::from_spreading_rates(
        10.0,
        &[0.3, 0.7],
        &[Rate::decimal(0.5).unwrap(), Rate::decimal(0.98).unwrap()],
        10.0,
        4.0,
        None,
    )
    .unwrap();
    PayoffEngine::new(m).unwrap()
}

/// beta = 5, delta = (10, 5.1), r = (0.3, 0.7), K = 10, lambda = 10.
pub fn fig6() -> PayoffEngine<f64> {
    let types = vec![
        PlayerType { share: 0.3, recovery: Rate::ratio(10, 1).unwrap() },
        PlayerType { share: 0.7, recovery: Rate::ratio(51, 10).unwrap() },
    ];
    let m = PopulationModel::new(10.0, types, Rate::ratio(5, 1).unwrap(), 10.0, 4.0, None).unwrap();
    PayoffEngine::new(m).unwrap()
}

pub fn single(tau: f64, lambda: f64, k: f64, c: f64) -> PayoffEngine<f64> {
    let m = PopulationModel::from_spreading_rates(lambda, &[1.0], &[Rate::decimal(tau).unwrap()], k, c, None)
        .unwrap();
    PayoffEngine::new(m).unwrap()
}
