//! Revenue-maximizing price control.
//!
//! The provider earns `R(C) = lambda (1 - p*(C)) C` and adjusts its price with
//! the randomly signed one-sided difference
//! `C_{n+1} = C_n + a(n) (R(C_n + delta D_n) - R(C_n)) / (delta D_n)`,
//! `D_n = +-1` with equal probability. Revenue is observed through a
//! [`RevenueOracle`]: either after the population has settled at each posted
//! price (NESTED) or after a single population step per price update (COUPLED).

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{population_step_offset, replicator_rhs, settle_discrete};
use crate::equilibrium::{pure_off_onset, solve_equilibrium, DEFAULT_TOL};
use crate::error::{invalid, Error, Result};
use crate::payoff::PayoffEngine;
use crate::scalar::Scalar;
use crate::schedule::{ScheduleFlags, StepSchedule};
use crate::solve::golden_section_max;

/// Grid size of the coarse scan in [`optimize_exact`].
pub const OPTIMIZE_GRID: usize = 512;

/// `lambda (1 - p*(C)) C` at the exact equilibrium.
pub fn revenue<T: Scalar>(engine: &PayoffEngine<T>, price: T) -> Result<T> {
    if !(price >= T::zero()) {
        return Err(invalid(format!("price must be >= 0, got {price}")));
    }
    let eq = solve_equilibrium(&engine.with_price(price)?, T::lit(DEFAULT_TOL))?;
    Ok(engine.lambda() * eq.protection_rate() * price)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConcavityReport<T> {
    pub grid: Vec<T>,
    pub values: Vec<T>,
    /// `R(C_{i-1}) - 2 R(C_i) + R(C_{i+1})` for interior points `i = 1..n-1`.
    pub second_differences: Vec<T>,
    /// Left end of the strictly concave tail: the last grid point whose
    /// second difference is `>= 0`, or the lower bound if none is.
    pub c0: Option<T>,
    /// Whether every second difference to the right of `c0` is negative.
    pub tail_concave: bool,
    pub failures: usize,
    /// Upper end actually scanned.
    pub upper: T,
}

/// Second differences of `f` on `n_points` evenly spaced prices in `[c_lo, c_hi]`.
pub fn concavity_check<T, F>(mut f: F, c_lo: T, c_hi: T, n_points: usize) -> Result<ConcavityReport<T>>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    if !(c_lo >= T::zero() && c_lo < c_hi) {
        return Err(invalid(format!("need 0 <= c_lo < c_hi, got [{c_lo}, {c_hi}]")));
    }
    if n_points < 3 {
        return Err(invalid("concavity check needs at least 3 grid points"));
    }
    let step = (c_hi - c_lo) / T::from_count(n_points as u64 - 1);
    let grid: Vec<T> = (0..n_points)
        .map(|i| if i + 1 == n_points { c_hi } else { c_lo + step * T::from_count(i as u64) })
        .collect();
    let values = grid.iter().map(|&c| f(c)).collect::<Result<Vec<T>>>()?;
    let second_differences: Vec<T> = values
        .windows(3)
        .map(|w| w[0] - T::lit(2.0) * w[1] + w[2])
        .collect();
    let failures = second_differences.iter().filter(|&&d| !(d < T::zero())).count();
    let last_fail = second_differences.iter().rposition(|&d| !(d < T::zero()));
    let (c0, tail_concave) = match last_fail {
        None => (Some(c_lo), true),
        Some(j) if j + 1 == second_differences.len() => (None, false),
        // second difference j is centred on grid point j + 1
        Some(j) => (Some(grid[j + 1]), true),
    };
    Ok(ConcavityReport {
        grid,
        values,
        second_differences,
        c0,
        tail_concave,
        failures,
        upper: c_hi,
    })
}

/// Concavity of the equilibrium revenue on `[c_lo, min(c_hi, onset)]`, where
/// `onset` is [`pure_off_onset`]: above it `R` is identically zero.
pub fn revenue_concavity<T: Scalar>(
    engine: &PayoffEngine<T>,
    c_lo: T,
    c_hi: T,
    n_points: usize,
) -> Result<ConcavityReport<T>> {
    if c_hi > engine.infection_cost() {
        return Err(invalid(format!("c_hi must be <= K, got {c_hi}")));
    }
    let upper = c_hi.min(pure_off_onset(engine));
    concavity_check(|c| revenue(engine, c), c_lo, upper, n_points)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Optimum<T> {
    pub price: T,
    pub revenue: T,
}

/// Grid scan of `[0, upper]` on [`OPTIMIZE_GRID`] points, then golden-section
/// refinement between the neighbours of the best grid point.
pub fn optimize_exact<T, F>(mut f: F, upper: T, tol: T) -> Result<Optimum<T>>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    if !(upper > T::zero()) {
        return Err(invalid(format!("upper price bound must be > 0, got {upper}")));
    }
    let n = OPTIMIZE_GRID;
    let step = upper / T::from_count(n as u64 - 1);
    let grid: Vec<T> = (0..n).map(|i| step * T::from_count(i as u64)).collect();
    let values = grid.iter().map(|&c| f(c)).collect::<Result<Vec<T>>>()?;
    let best = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > values[best] { i } else { best });
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(n - 1)];
    let (price, value) = golden_section_max(&mut f, lo, hi, tol)?;
    Ok(if value >= values[best] {
        Optimum { price, revenue: value }
    } else {
        Optimum { price: grid[best], revenue: values[best] }
    })
}

/// Optimal price of the equilibrium revenue.
pub fn optimize_revenue<T: Scalar>(engine: &PayoffEngine<T>, tol: T) -> Result<Optimum<T>> {
    optimize_exact(|c| revenue(engine, c), engine.infection_cost(), tol)
}

/// Uniform `+1` / `-1`.
pub fn draw_sign<R: Rng + ?Sized>(rng: &mut R) -> i8 {
    if rng.gen_bool(0.5) {
        1
    } else {
        -1
    }
}

/// `(R(C + delta D) - R(C)) / (delta D)`.
pub fn spsa_quotient<T: Scalar>(probe: T, base: T, delta: T, sign: i8) -> T {
    let signed = delta * T::lit(sign as f64);
    (probe - base) / signed
}

/// One SPSA gradient sample of `revenue_eval` at `price`.
pub fn spsa_gradient<T, F, R>(mut revenue_eval: F, price: T, delta: T, rng: &mut R) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
    R: Rng + ?Sized,
{
    if !(delta > T::zero()) {
        return Err(invalid(format!("delta must be > 0, got {delta}")));
    }
    let sign = draw_sign(rng);
    let base = revenue_eval(price)?;
    let probe = revenue_eval(price + delta * T::lit(sign as f64))?;
    Ok(spsa_quotient(probe, base, delta, sign))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlMode {
    /// One population step per price update, revenue read off the current state.
    Coupled,
    /// Population run to convergence at every posted price.
    Nested,
}

impl ControlMode {
    pub fn name(self) -> &'static str {
        match self {
            ControlMode::Coupled => "COUPLED",
            ControlMode::Nested => "NESTED",
        }
    }
}

impl fmt::Display for ControlMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControlMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "coupled" => Ok(ControlMode::Coupled),
            "nested" => Ok(ControlMode::Nested),
            other => Err(Error::Config(format!("unknown control mode `{other}`"))),
        }
    }
}

/// Which of the three posted prices `C`, `C + delta`, `C - delta` an
/// observation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arm {
    Base,
    Plus,
    Minus,
}

impl Arm {
    fn for_sign(sign: i8) -> Self {
        if sign > 0 {
            Arm::Plus
        } else {
            Arm::Minus
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation<T> {
    pub revenue: T,
    /// Population OFF share behind the observation, when there is one.
    pub population: Option<T>,
}

/// Source of revenue observations for the controller.
pub trait RevenueOracle<T: Scalar> {
    /// Largest admissible price (`K` for the game).
    fn max_price(&self) -> T;

    /// Revenue once the population has settled at `price`.
    fn settled_revenue(&mut self, price: T) -> Result<T>;

    /// Advances the population facing `arm` by one step at `price` and reports revenue.
    fn coupled_revenue(&mut self, price: T, arm: Arm) -> Result<Observation<T>>;
}

/// Closure-backed oracle, used to test the controller on known functions.
pub struct FnRevenue<F, T> {
    f: F,
    upper: T,
}

impl<F, T> FnRevenue<F, T> {
    pub fn new(f: F, upper: T) -> Self {
        FnRevenue { f, upper }
    }
}

impl<T: Scalar, F: FnMut(T) -> T> RevenueOracle<T> for FnRevenue<F, T> {
    fn max_price(&self) -> T {
        self.upper
    }

    fn settled_revenue(&mut self, price: T) -> Result<T> {
        Ok((self.f)(price))
    }

    fn coupled_revenue(&mut self, price: T, _arm: Arm) -> Result<Observation<T>> {
        Ok(Observation { revenue: (self.f)(price), population: None })
    }
}

/// Revenue at the exact equilibrium, no dynamics involved.
pub struct EquilibriumRevenue<T> {
    engine: PayoffEngine<T>,
}

impl<T: Scalar> EquilibriumRevenue<T> {
    pub fn new(engine: PayoffEngine<T>) -> Self {
        EquilibriumRevenue { engine }
    }
}

impl<T: Scalar> RevenueOracle<T> for EquilibriumRevenue<T> {
    fn max_price(&self) -> T {
        self.engine.infection_cost()
    }

    fn settled_revenue(&mut self, price: T) -> Result<T> {
        revenue(&self.engine, price)
    }

    fn coupled_revenue(&mut self, price: T, _arm: Arm) -> Result<Observation<T>> {
        Ok(Observation { revenue: revenue(&self.engine, price)?, population: None })
    }
}

#[derive(Clone, Copy, Debug)]
struct PopulationArm<T> {
    p: T,
    steps: u64,
}

/// A population following the discrete replicator dynamics with
/// `b(n) = 1/(n + n0)`; revenue is `lambda (1 - p) C` at its current state.
///
/// Each arm is a separate population facing its own price sequence, so the
/// probe arms track `p*(C +- delta)` while the base arm tracks `p*(C)`.
pub struct ReplicatorMarket<T> {
    engine: PayoffEngine<T>,
    schedule: StepSchedule,
    tol: T,
    n_max: u64,
    arms: [PopulationArm<T>; 3],
}

impl<T: Scalar> ReplicatorMarket<T> {
    pub fn new(engine: PayoffEngine<T>, p0: T, tol: T, n_max: u64) -> Self {
        let schedule = StepSchedule::inv_n().with_offset(population_step_offset(&engine));
        let arm = PopulationArm { p: p0, steps: 0 };
        ReplicatorMarket { engine, schedule, tol, n_max, arms: [arm; 3] }
    }

    pub fn population(&self, arm: Arm) -> T {
        self.arms[arm as usize].p
    }
}

impl<T: Scalar> RevenueOracle<T> for ReplicatorMarket<T> {
    fn max_price(&self) -> T {
        self.engine.infection_cost()
    }

    fn settled_revenue(&mut self, price: T) -> Result<T> {
        let priced = self.engine.with_price(price)?;
        let schedule = StepSchedule::inv_n().with_offset(population_step_offset(&priced));
        // warm start from the last settled state, nudged off the boundary
        let eta = T::lit(1e-6);
        let start = self.arms[0].p.max(eta).min(T::one() - eta);
        let settled = settle_discrete(&priced, start, &schedule, self.n_max, self.tol);
        self.arms[0].p = settled.value;
        Ok(self.engine.lambda() * (T::one() - settled.value) * price)
    }

    fn coupled_revenue(&mut self, price: T, arm: Arm) -> Result<Observation<T>> {
        let priced = self.engine.with_price(price)?;
        let state = &mut self.arms[arm as usize];
        state.steps += 1;
        let b: T = self.schedule.step(state.steps);
        let next = state.p + b * replicator_rhs(&priced, state.p, T::one());
        state.p = next.max(T::zero()).min(T::one());
        Ok(Observation {
            revenue: self.engine.lambda() * (T::one() - state.p) * price,
            population: Some(state.p),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControllerSettings<T> {
    pub schedule: StepSchedule,
    pub delta: T,
    pub c0: T,
    pub n_outer: u64,
    pub mode: ControlMode,
    pub seed: u64,
}

impl<T: Scalar> ControllerSettings<T> {
    /// Defaults for a game with infection cost `k`: `delta = 0.01 K`, `C0 = 0.2 K`.
    pub fn for_cost(k: T, schedule: StepSchedule, mode: ControlMode, seed: u64) -> Self {
        ControllerSettings {
            schedule,
            delta: T::lit(0.01) * k,
            c0: T::lit(0.2) * k,
            n_outer: 300,
            mode,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlStep<T> {
    pub n: u64,
    pub price: T,
    pub revenue: T,
    pub sign: i8,
    pub population: Option<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControllerState<T> {
    pub price: T,
    pub iteration: u64,
    pub schedule: StepSchedule,
    pub flags: ScheduleFlags,
    pub delta: T,
    pub seed: u64,
    pub mode: ControlMode,
    pub trace: Vec<ControlStep<T>>,
}

impl<T: Scalar> ControllerState<T> {
    /// Whether the step sizes meet all three convergence conditions.
    pub fn schedule_admissible(&self) -> bool {
        self.flags.two_timescale()
    }
}

/// SPSA price updates against `oracle`, projected onto `[delta, K - delta]`.
pub fn run_two_timescale<T, O>(oracle: &mut O, settings: &ControllerSettings<T>) -> Result<ControllerState<T>>
where
    T: Scalar,
    O: RevenueOracle<T> + ?Sized,
{
    let k = oracle.max_price();
    let delta = settings.delta;
    if !(delta > T::zero()) || !(T::lit(2.0) * delta < k) {
        return Err(invalid(format!("delta must satisfy 0 < 2 delta < K, got {delta}")));
    }
    if !(settings.c0 > T::zero() && settings.c0 < k) {
        return Err(invalid(format!("C0 must lie in (0, K), got {}", settings.c0)));
    }
    let project = |c: T| c.max(delta).min(k - delta);
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut price = project(settings.c0);
    let mut trace = Vec::with_capacity(settings.n_outer as usize);

    for n in 1..=settings.n_outer {
        let sign = draw_sign(&mut rng);
        let probe_price = price + delta * T::lit(sign as f64);
        let (base, probe, population) = match settings.mode {
            ControlMode::Nested => {
                let base = oracle.settled_revenue(price)?;
                let probe = oracle.settled_revenue(probe_price)?;
                (base, probe, None)
            }
            ControlMode::Coupled => {
                // every arm steps once per price update, observed or not
                let base = oracle.coupled_revenue(price, Arm::Base)?;
                let plus = oracle.coupled_revenue(price + delta, Arm::Plus)?;
                let minus = oracle.coupled_revenue(price - delta, Arm::Minus)?;
                let probe = if Arm::for_sign(sign) == Arm::Plus { plus } else { minus };
                (base.revenue, probe.revenue, base.population)
            }
        };
        let gradient = spsa_quotient(probe, base, delta, sign);
        if !gradient.is_finite() {
            return Err(Error::Numerical(format!("non-finite gradient estimate at C = {price}")));
        }
        trace.push(ControlStep { n, price, revenue: base, sign, population });
        let a: T = settings.schedule.step(n);
        price = project(price + a * gradient);
    }

    Ok(ControllerState {
        price,
        iteration: settings.n_outer,
        schedule: settings.schedule,
        flags: settings.schedule.flags(),
        delta,
        seed: settings.seed,
        mode: settings.mode,
        trace,
    })
}

/// Runs the controller against a population following the discrete
/// replicator with `b(n) = 1/(n + n0)`, starting from `p0`.
pub fn run_on_game<T: Scalar>(
    engine: &PayoffEngine<T>,
    settings: &ControllerSettings<T>,
    p0: T,
    population_tol: T,
    population_n_max: u64,
) -> Result<ControllerState<T>> {
    let mut market = ReplicatorMarket::new(engine.clone(), p0, population_tol, population_n_max);
    run_two_timescale(&mut market, settings)
}
