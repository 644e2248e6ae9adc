//! Replicator dynamics `p' = (1/eps) p (1 - p) (C - U(OFF, p))`, in
//! continuous time (fixed-step RK4) and as the stochastic-approximation
//! recursion `p_{n+1} = p_n + b(n) p_n (1 - p_n) (C - U(OFF, p_n))`.

use crate::error::{invalid, Result};
use crate::payoff::PayoffEngine;
use crate::scalar::Scalar;
use crate::schedule::StepSchedule;

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    /// Time for ODE runs, iteration index for discrete runs.
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub converged: bool,
    pub rest_point: Option<T>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn last_value(&self) -> T {
        *self.values.last().expect("trajectories hold at least the initial point")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn replicator_rhs<T: Scalar>(engine: &PayoffEngine<T>, p: T, epsilon: T) -> T {
    p * (T::one() - p) * (engine.protection_cost() - engine.expected_cost_off(p)) / epsilon
}

/// Step that keeps `dt * lambda * K / eps <= 1/2`.
pub fn default_dt<T: Scalar>(engine: &PayoffEngine<T>, epsilon: T) -> T {
    T::lit(0.5) * epsilon / (engine.lambda() * engine.infection_cost())
}

fn clamp_unit<T: Scalar>(p: T) -> T {
    p.max(T::zero()).min(T::one())
}

/// Classical RK4 with fixed step `dt` up to `t_max`. Stops early once
/// `|p'| < tol` and the last step moved `p` by less than `tol * dt`.
pub fn integrate_replicator<T: Scalar>(
    engine: &PayoffEngine<T>,
    p0: T,
    dt: T,
    t_max: T,
    epsilon: T,
    tol: T,
) -> Result<Trajectory<T>> {
    if !(dt > T::zero()) || !(t_max > T::zero()) {
        return Err(invalid(format!("dt and t_max must be > 0 (dt = {dt}, t_max = {t_max})")));
    }
    if !(epsilon > T::zero()) {
        return Err(invalid(format!("epsilon must be > 0, got {epsilon}")));
    }
    if !(T::zero()..=T::one()).contains(&p0) {
        return Err(invalid(format!("initial state {p0} outside [0, 1]")));
    }
    let f = |p: T| replicator_rhs(engine, clamp_unit(p), epsilon);
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    let steps = (t_max / dt).ceil().to_u64().unwrap_or(u64::MAX);

    let mut times = vec![T::zero()];
    let mut values = vec![p0];
    let mut p = p0;
    let mut converged = false;
    for k in 1..=steps {
        let k1 = f(p);
        let k2 = f(p + dt / two * k1);
        let k3 = f(p + dt / two * k2);
        let k4 = f(p + dt * k3);
        let next = clamp_unit(p + dt / six * (k1 + two * k2 + two * k3 + k4));
        let moved = (next - p).abs();
        p = next;
        times.push(dt * T::from_count(k));
        values.push(p);
        if f(p).abs() < tol && moved < tol * dt {
            converged = true;
            break;
        }
    }
    Ok(Trajectory {
        times,
        values,
        converged,
        rest_point: converged.then_some(p),
        warnings: Vec::new(),
    })
}

/// Offset `n0` for `b(n) = 1/(n + n0)` such that `b(n) max(C, K - C) < 1`
/// for all `n >= 1`. With it no step can leave the open interval `(0, 1)`.
pub fn population_step_offset<T: Scalar>(engine: &PayoffEngine<T>) -> u64 {
    let c = engine.protection_cost();
    let span = c.max(engine.infection_cost() - c);
    span.floor().to_u64().unwrap_or(0)
}

/// Outcome of running the discrete recursion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Settled<T> {
    pub value: T,
    pub converged: bool,
    pub iterations: u64,
}

/// Runs the recursion, handing every iterate `(n, p_n)` to `observe`.
/// Returning `false` from `observe` stops the run early (not converged).
pub fn discrete_replicator_with<T: Scalar>(
    engine: &PayoffEngine<T>,
    p0: T,
    schedule: &StepSchedule,
    n_max: u64,
    tol: T,
    mut observe: impl FnMut(u64, T) -> bool,
) -> Settled<T> {
    let mut p = p0;
    for n in 1..=n_max {
        let b: T = schedule.step(n);
        let next = clamp_unit(p + b * replicator_rhs(engine, p, T::one()));
        let moved = (next - p).abs();
        p = next;
        if !observe(n, p) {
            return Settled { value: p, converged: false, iterations: n };
        }
        if moved / b < tol {
            return Settled { value: p, converged: true, iterations: n };
        }
    }
    Settled { value: p, converged: false, iterations: n_max }
}

/// Runs the recursion without keeping the path.
pub fn settle_discrete<T: Scalar>(
    engine: &PayoffEngine<T>,
    p0: T,
    schedule: &StepSchedule,
    n_max: u64,
    tol: T,
) -> Settled<T> {
    discrete_replicator_with(engine, p0, schedule, n_max, tol, |_, _| true)
}

/// Discrete replicator from `n = 1`, clamped to `[0, 1]`. Converged when
/// `|p_{n+1} - p_n| / b(n) < tol`.
pub fn discrete_replicator<T: Scalar>(
    engine: &PayoffEngine<T>,
    p0: T,
    schedule: &StepSchedule,
    n_max: u64,
    tol: T,
) -> Result<Trajectory<T>> {
    discrete_replicator_strided(engine, p0, schedule, n_max, tol, 1)
}

/// As [`discrete_replicator`], recording every `stride`-th iterate (and the last).
pub fn discrete_replicator_strided<T: Scalar>(
    engine: &PayoffEngine<T>,
    p0: T,
    schedule: &StepSchedule,
    n_max: u64,
    tol: T,
    stride: u64,
) -> Result<Trajectory<T>> {
    if !(T::zero()..=T::one()).contains(&p0) {
        return Err(invalid(format!("initial state {p0} outside [0, 1]")));
    }
    if stride == 0 {
        return Err(invalid("stride must be >= 1"));
    }
    let mut warnings = Vec::new();
    let flags = schedule.flags();
    if !flags.sums_to_infinity {
        warnings.push(format!(
            "step sizes {} have finite total mass; the iterate may stall short of the rest point",
            schedule.family
        ));
    }
    if !flags.square_summable {
        warnings.push(format!(
            "step sizes {} are not square summable; the iterate keeps oscillating",
            schedule.family
        ));
    }

    let mut times = vec![T::zero()];
    let mut values = vec![p0];
    let mut last = (0, p0);
    let settled = discrete_replicator_with(engine, p0, schedule, n_max, tol, |n, p| {
        last = (n, p);
        if n % stride == 0 {
            times.push(T::from_count(n));
            values.push(p);
        }
        true
    });
    if last.0 % stride != 0 {
        times.push(T::from_count(last.0));
        values.push(last.1);
    }
    Ok(Trajectory {
        times,
        values,
        converged: settled.converged,
        rest_point: settled.converged.then_some(settled.value),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{solve_equilibrium, DEFAULT_TOL};
    use crate::model::{PopulationModel, Rate};

    fn fig4(lambda: f64) -> PayoffEngine<f64> {
        let m = PopulationModel::from_spreading_rates(
            lambda,
            &[0.1, 0.9],
            &[Rate::decimal(0.05).unwrap(), Rate::decimal(0.2).unwrap()],
            5.0,
            4.0,
            None,
        )
        .unwrap();
        PayoffEngine::new(m).unwrap()
    }

    #[test]
    fn rhs_signs_and_fixed_points() {
        let e = fig4(10.0);
        assert_eq!(replicator_rhs(&e, 0.0, 1.0), 0.0);
        assert_eq!(replicator_rhs(&e, 1.0, 1.0), 0.0);
        let p = solve_equilibrium(&e, DEFAULT_TOL).unwrap().p_star;
        assert!(replicator_rhs(&e, p, 1.0).abs() < 1e-8);
        assert!(e.expected_cost_off(0.3) < 4.0);
        assert!(replicator_rhs(&e, 0.3, 1.0) > 0.0);
        assert!(replicator_rhs(&e, 0.95, 1.0) < 0.0);
        assert!((replicator_rhs(&e, 0.3, 0.1) - 10.0 * replicator_rhs(&e, 0.3, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn ode_converges_from_both_sides() {
        let e = fig4(20.0);
        let dt = default_dt(&e, 1.0);
        for p0 in [0.3, 0.7] {
            let tr = integrate_replicator(&e, p0, dt, 500.0, 1.0, 1e-9).unwrap();
            assert!(tr.converged);
            assert!((tr.last_value() - 0.44).abs() < 0.03);
        }
    }

    #[test]
    fn ode_boundary_and_rest_starts() {
        let e = fig4(10.0);
        let tr = integrate_replicator(&e, 0.0, 0.01, 10.0, 1.0, 1e-9).unwrap();
        assert!(tr.values.iter().all(|&p| p == 0.0));
        let p = solve_equilibrium(&e, DEFAULT_TOL).unwrap().p_star;
        let tr = integrate_replicator(&e, p, 0.01, 10.0, 1.0, 1e-8).unwrap();
        assert!(tr.converged);
        assert!((tr.last_value() - p).abs() < 1e-8);
    }

    #[test]
    fn ode_parameter_errors() {
        let e = fig4(10.0);
        assert!(integrate_replicator(&e, 0.5, 0.0, 10.0, 1.0, 1e-9).is_err());
        assert!(integrate_replicator(&e, 0.5, 0.01, -1.0, 1.0, 1e-9).is_err());
        assert!(integrate_replicator(&e, 1.5, 0.01, 1.0, 1.0, 1e-9).is_err());
    }

    #[test]
    fn offset_keeps_iterates_inside() {
        let e = fig4(10.0);
        assert_eq!(population_step_offset(&e), 4);
        let plain = discrete_replicator(&e, 0.5, &StepSchedule::inv_n(), 100, 1e-12).unwrap();
        // b(1) = 1 throws the state onto the absorbing boundary
        assert_eq!(plain.values[1], 1.0);
        let shifted = StepSchedule::inv_n().with_offset(population_step_offset(&e));
        let tr = discrete_replicator(&e, 0.5, &shifted, 10_000, 1e-12).unwrap();
        assert!(tr.values.iter().all(|&p| p > 0.0 && p < 1.0));
    }

    #[test]
    fn discrete_fixed_points_and_stalls() {
        let e = fig4(10.0);
        for p0 in [0.0, 1.0] {
            let tr = discrete_replicator(&e, p0, &StepSchedule::inv_n(), 10, 1e-9).unwrap();
            assert!(tr.converged);
            assert!(tr.values.iter().all(|&p| p == p0));
        }
        let p = solve_equilibrium(&e, DEFAULT_TOL).unwrap().p_star;
        let sq = StepSchedule::inv_n_sq().with_offset(4);
        let tr = discrete_replicator(&e, 0.5, &sq, 100_000, 1e-12).unwrap();
        assert!(!tr.warnings.is_empty());
        assert!((tr.last_value() - p).abs() > 0.05);
    }

    #[test]
    fn observer_can_stop_the_run() {
        let e = fig4(20.0);
        let s = StepSchedule::inv_n().with_offset(population_step_offset(&e));
        let mut seen = 0;
        let r = discrete_replicator_with(&e, 0.3, &s, 1000, 1e-12, |n, _| {
            seen = n;
            n < 10
        });
        assert_eq!((seen, r.iterations, r.converged), (10, 10, false));
    }

    #[test]
    fn strided_recording_keeps_last_point() {
        let e = fig4(20.0);
        let s = StepSchedule::inv_n().with_offset(population_step_offset(&e));
        let full = discrete_replicator(&e, 0.3, &s, 1000, 1e-10).unwrap();
        let thin = discrete_replicator_strided(&e, 0.3, &s, 1000, 1e-10, 7).unwrap();
        assert_eq!(full.last_value(), thin.last_value());
        assert_eq!(full.times.last(), thin.times.last());
        assert!(thin.len() < full.len());
    }
}
