//! Symmetric equilibrium of the protection game.
//!
//! All sign tests work on the scaled gap `e^{-lambda p} (F(p) - G(p))
//! = e^{-lambda p} F(p) - (1 - C/K)`, which has the sign of `F - G` but
//! stays in `[-1, 1]` for any `lambda`.

use std::fmt;

use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::lambert::lambert_w_minus1;
use crate::model::Convention;
use crate::payoff::PayoffEngine;
use crate::scalar::Scalar;
use crate::solve::bisect;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Bound on the indifference residual of a closed-form solution.
pub const CLOSED_FORM_RESIDUAL_TOL: f64 = 1e-8;

/// Strictness margin for the ESS inequality.
pub const ESS_MARGIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquilibriumKind {
    PureOffDominant,
    InteriorMixed,
    ClosedFormLog,
    ClosedFormLambert,
}

impl EquilibriumKind {
    pub fn name(self) -> &'static str {
        match self {
            EquilibriumKind::PureOffDominant => "PURE_OFF_DOMINANT",
            EquilibriumKind::InteriorMixed => "INTERIOR_MIXED",
            EquilibriumKind::ClosedFormLog => "CLOSED_FORM_LOG",
            EquilibriumKind::ClosedFormLambert => "CLOSED_FORM_LAMBERT",
        }
    }
}

impl fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquilibriumResult<T> {
    /// Equilibrium probability of playing OFF.
    pub p_star: T,
    pub kind: EquilibriumKind,
    /// `|e^{-lambda p*} (F(p*) - G(p*))| = |U(OFF, p*) - C| / K`; 0 for pure outcomes.
    pub residual: T,
    pub iterations: usize,
    pub convention: Convention,
}

impl<T: Scalar> EquilibriumResult<T> {
    /// Share of players that protect, `1 - p*`.
    pub fn protection_rate(&self) -> T {
        T::one() - self.p_star
    }

    fn pure(engine: &PayoffEngine<T>) -> Self {
        EquilibriumResult {
            p_star: T::one(),
            kind: EquilibriumKind::PureOffDominant,
            residual: T::zero(),
            iterations: 0,
            convention: engine.model().convention(),
        }
    }
}

/// `e^{-lambda p} (F(p) - G(p))`.
pub fn scaled_gap<T: Scalar>(engine: &PayoffEngine<T>, p: T) -> T {
    let keep = T::one() - engine.protection_cost() / engine.infection_cost();
    engine.safe_mass(p) - keep
}

/// OFF is dominant when protection costs at least as much as infection.
pub fn check_dominance<T: Scalar>(engine: &PayoffEngine<T>) -> Option<EquilibriumResult<T>> {
    (engine.protection_cost() >= engine.infection_cost()).then(|| EquilibriumResult::pure(engine))
}

/// `F(1) < G(1)`: the curves cross inside `(0, 1)`.
pub fn interior_exists<T: Scalar>(engine: &PayoffEngine<T>) -> bool {
    scaled_gap(engine, T::one()) < T::zero()
}

/// Price above which no interior equilibrium exists: `K (1 - e^{-lambda} F(1))`.
/// Below `K`, every price at or above it gives `p* = 1`.
pub fn pure_off_onset<T: Scalar>(engine: &PayoffEngine<T>) -> T {
    engine.infection_cost() * (T::one() - engine.safe_mass(T::one()))
}

/// General solver: dominance, then the crossing test, then bisection of
/// `F - G` on `[0, 1]` down to a bracket of width `tol`.
pub fn solve_equilibrium<T: Scalar>(engine: &PayoffEngine<T>, tol: T) -> Result<EquilibriumResult<T>> {
    if let Some(pure) = check_dominance(engine) {
        return Ok(pure);
    }
    let at_one = scaled_gap(engine, T::one());
    if !at_one.is_finite() {
        return Err(Error::Numerical(format!(
            "non-finite crossing test at p = 1 (lambda = {})",
            engine.lambda()
        )));
    }
    if at_one >= T::zero() {
        return Ok(EquilibriumResult::pure(engine));
    }
    let root = bisect(|p| scaled_gap(engine, p), T::zero(), T::one(), tol)?;
    Ok(EquilibriumResult {
        p_star: root.x,
        kind: EquilibriumKind::InteriorMixed,
        residual: root.value.abs(),
        iterations: root.iterations,
        convention: engine.model().convention(),
    })
}

fn single_type_tau<T: Scalar>(engine: &PayoffEngine<T>, what: &str) -> Result<BigRational> {
    let model = engine.model();
    if model.num_types() != 1 {
        return Err(Error::Domain(format!("{what} needs a single player type")));
    }
    if model.convention() != Convention::SelfExclusive {
        return Err(Error::Domain(format!("{what} needs the SELF_EXCLUSIVE convention")));
    }
    if engine.protection_cost() >= engine.infection_cost() {
        return Err(Error::Domain(format!(
            "{what} needs C < K; OFF is dominant otherwise"
        )));
    }
    Ok(model.exact_spreading_rates().remove(0))
}

/// Single type with `tau > 1`: nobody else may be unprotected, so
/// `p* = min(1, ln(K / (K - C)) / lambda)`.
pub fn closed_form_high_tau<T: Scalar>(engine: &PayoffEngine<T>) -> Result<EquilibriumResult<T>> {
    let tau = single_type_tau(engine, "log closed form")?;
    if tau <= BigRational::one() {
        return Err(Error::Domain(format!("log closed form needs tau > 1, got {tau}")));
    }
    let k = engine.infection_cost();
    let c = engine.protection_cost();
    let p = ((k / (k - c)).ln() / engine.lambda()).min(T::one());
    Ok(EquilibriumResult {
        p_star: p,
        kind: EquilibriumKind::ClosedFormLog,
        residual: scaled_gap(engine, p).abs(),
        iterations: 0,
        convention: Convention::SelfExclusive,
    })
}

/// Result of the Lambert closed form, which only applies when its value lies in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClosedForm<T> {
    Solved(EquilibriumResult<T>),
    /// The formula left `[0, 1]`; `fallback` comes from [`solve_equilibrium`].
    Deferred {
        formula_value: T,
        fallback: EquilibriumResult<T>,
    },
}

impl<T: Scalar> ClosedForm<T> {
    pub fn result(&self) -> &EquilibriumResult<T> {
        match self {
            ClosedForm::Solved(r) => r,
            ClosedForm::Deferred { fallback, .. } => fallback,
        }
    }
}

/// Single type with `1/2 < tau <= 1`: `1 + lambda p = (1 - C/K) e^{lambda p}`,
/// solved by `p* = -(1 + W_{-1}(-(1 - C/K) / e)) / lambda`.
pub fn closed_form_mid_tau<T: Scalar>(engine: &PayoffEngine<T>) -> Result<ClosedForm<T>> {
    let tau = single_type_tau(engine, "Lambert closed form")?;
    let half = BigRational::new(1.into(), 2.into());
    if tau <= half || tau > BigRational::one() {
        return Err(Error::Domain(format!(
            "Lambert closed form needs 1/2 < tau <= 1, got {tau}"
        )));
    }
    let keep = T::one() - engine.protection_cost() / engine.infection_cost();
    let w = lambert_w_minus1(-keep / T::E())?;
    let lambda = engine.lambda();
    let p = -(T::one() + w) / lambda;

    if !p.is_finite() || p > T::one() {
        return Ok(ClosedForm::Deferred {
            formula_value: p,
            fallback: solve_equilibrium(engine, T::lit(DEFAULT_TOL))?,
        });
    }
    let lp = lambda * p;
    let residual = ((T::one() + lp) * (-lp).exp() - keep).abs();
    if residual > T::lit(CLOSED_FORM_RESIDUAL_TOL) {
        return Err(Error::Numerical(format!(
            "Lambert closed form residual {residual} exceeds {CLOSED_FORM_RESIDUAL_TOL}"
        )));
    }
    Ok(ClosedForm::Solved(EquilibriumResult {
        p_star: p,
        kind: EquilibriumKind::ClosedFormLambert,
        residual,
        iterations: 0,
        convention: Convention::SelfExclusive,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EssReport<T> {
    pub passed: bool,
    /// Smallest `U(q, p_eps) - U(p*, p_eps)` over the grid.
    pub worst_margin: T,
    pub worst_q: T,
    pub worst_eps: T,
    pub checked: usize,
    /// Grid mutants skipped for being within `1e-9` of `p*`.
    pub skipped: usize,
}

/// Checks that `p*` strictly undercuts every mutant `q` at every invasion
/// share `eps`: `U(p*, p_eps) < U(q, p_eps)` with `p_eps = eps q + (1 - eps) p*`.
pub fn verify_ess<T: Scalar>(
    engine: &PayoffEngine<T>,
    p_star: T,
    q_grid: &[T],
    eps_grid: &[T],
) -> EssReport<T> {
    let margin_floor = T::lit(ESS_MARGIN);
    let mut report = EssReport {
        passed: true,
        worst_margin: T::infinity(),
        worst_q: T::nan(),
        worst_eps: T::nan(),
        checked: 0,
        skipped: 0,
    };
    for &q in q_grid {
        if (q - p_star).abs() <= T::lit(1e-9) {
            report.skipped += 1;
            continue;
        }
        for &eps in eps_grid {
            let mixed = eps * q + (T::one() - eps) * p_star;
            let margin =
                engine.expected_cost_mixed(q, mixed) - engine.expected_cost_mixed(p_star, mixed);
            report.checked += 1;
            if margin < report.worst_margin {
                report.worst_margin = margin;
                report.worst_q = q;
                report.worst_eps = eps;
            }
            if !(margin > margin_floor) {
                report.passed = false;
            }
        }
    }
    report
}
