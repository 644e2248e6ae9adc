//! Realized and expected costs of the protection game.
//!
//! With every player OFF with probability `p`, the number of unprotected
//! type-`t` opponents is Poisson with mean `lambda r(t) p`. An unprotected
//! player pays `K` when the outcome propagates, so
//!
//! ```text
//! U(OFF, p) = K (1 - e^{-lambda p} F(p)),   F(p) = sum_n c_n (lambda p)^n
//! ```
//!
//! where `c_n` are the safe-set coefficients. An interior equilibrium solves
//! `F(p) = G(p) = (1 - C/K) e^{lambda p}`.

use crate::error::{invalid, Error, Result};
use crate::model::{OutcomeVector, PopulationModel, SafeSet, DEFAULT_SAFESET_CAP};
use crate::scalar::{CompensatedSum, Scalar};

/// A model together with its precomputed safe set.
#[derive(Clone, Debug)]
pub struct PayoffEngine<T> {
    model: PopulationModel<T>,
    safe_set: SafeSet<T>,
}

impl<T: Scalar> PayoffEngine<T> {
    pub fn new(model: PopulationModel<T>) -> Result<Self> {
        Self::with_cap(model, DEFAULT_SAFESET_CAP)
    }

    pub fn with_cap(model: PopulationModel<T>, cap: usize) -> Result<Self> {
        let safe_set = model.enumerate_safe_set_capped(cap)?;
        Ok(PayoffEngine { model, safe_set })
    }

    /// Pairs a model with a safe set built elsewhere; the two must match.
    pub fn from_parts(model: PopulationModel<T>, safe_set: SafeSet<T>) -> Result<Self> {
        let expected = model.safe_set_fingerprint();
        if expected != safe_set.fingerprint() {
            return Err(Error::ModelMismatch {
                expected,
                found: safe_set.fingerprint(),
            });
        }
        Ok(PayoffEngine { model, safe_set })
    }

    pub fn model(&self) -> &PopulationModel<T> {
        &self.model
    }

    pub fn safe_set(&self) -> &SafeSet<T> {
        &self.safe_set
    }

    pub fn lambda(&self) -> T {
        self.model.lambda()
    }

    pub fn infection_cost(&self) -> T {
        self.model.infection_cost()
    }

    pub fn protection_cost(&self) -> T {
        self.model.protection_cost()
    }

    /// Same game at another protection price. The safe set is shared.
    pub fn with_price(&self, c: T) -> Result<Self> {
        Ok(PayoffEngine {
            model: self.model.with_protection_cost(c)?,
            safe_set: self.safe_set.clone(),
        })
    }

    /// Same game with another mean interaction size. The safe set is shared.
    pub fn with_lambda(&self, lambda: T) -> Result<Self> {
        Ok(PayoffEngine {
            model: self.model.with_lambda(lambda)?,
            safe_set: self.safe_set.clone(),
        })
    }

    /// Same spreading rates with another type distribution; only the
    /// coefficients are recomputed.
    pub fn with_type_dist(&self, shares: &[T]) -> Result<Self> {
        let model = self.model.with_type_dist(shares)?;
        let safe_set = self.safe_set.reweighted(&model)?;
        Ok(PayoffEngine { model, safe_set })
    }

    /// `u(OFF, x)`: `K` if `x` propagates, else 0.
    pub fn realized_cost_off(&self, x: &OutcomeVector) -> Result<T> {
        Ok(if self.model.propagates(x)? {
            self.model.infection_cost()
        } else {
            T::zero()
        })
    }

    /// `F(p) = sum_n c_n (lambda p)^n`, by Horner's scheme.
    pub fn safe_series(&self, p: T) -> T {
        let z = self.model.lambda() * p;
        self.safe_set
            .coeffs()
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * z + c)
    }

    /// `G(p) = (1 - C/K) e^{lambda p}`.
    pub fn threshold_exp(&self, p: T) -> T {
        let ratio = self.model.protection_cost() / self.model.infection_cost();
        (T::one() - ratio) * (self.model.lambda() * p).exp()
    }

    /// Probability that a focal OFF player escapes infection: `e^{-lambda p} F(p)`.
    pub fn safe_mass(&self, p: T) -> T {
        (-(self.model.lambda() * p)).exp() * self.safe_series(p)
    }

    /// `U(OFF, p) = K (1 - e^{-lambda p} F(p))`, clamped into `[0, K]`.
    pub fn expected_cost_off(&self, p: T) -> T {
        let k = self.model.infection_cost();
        let u = k * (T::one() - self.safe_mass(p));
        u.max(T::zero()).min(k)
    }

    /// `U(q, p) = q U(OFF, p) + (1 - q) C`.
    pub fn expected_cost_mixed(&self, q: T, p: T) -> T {
        q * self.expected_cost_off(p) + (T::one() - q) * self.model.protection_cost()
    }

    /// `P(X = x | p) = prod_t Poisson(x_t; lambda r(t) p)`, evaluated in log space.
    pub fn outcome_probability(&self, x: &OutcomeVector, p: T) -> Result<T> {
        if x.0.len() != self.model.num_types() {
            return Err(invalid("outcome vector dimension does not match the model"));
        }
        let mut log_mass = CompensatedSum::default();
        for (ty, &xt) in self.model.types().iter().zip(&x.0) {
            let mean = self.model.lambda() * ty.share * p;
            if xt > 0 {
                if mean <= T::zero() {
                    return Ok(T::zero());
                }
                log_mass.add(T::from_count(xt as u64) * mean.ln());
                log_mass.add(-ln_factorial::<T>(xt));
            }
            log_mass.add(-mean);
        }
        Ok(log_mass.value().exp())
    }
}

fn ln_factorial<T: Scalar>(n: u32) -> T {
    (2..=n as u64)
        .map(|k| T::from_count(k).ln())
        .collect::<CompensatedSum<T>>()
        .value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Convention, Rate};
    use approx::assert_relative_eq;

    fn single(tau: f64, lambda: f64, k: f64, c: f64) -> PayoffEngine<f64> {
        let m = PopulationModel::from_spreading_rates(
            lambda,
            &[1.0],
            &[Rate::decimal(tau).unwrap()],
            k,
            c,
            None,
        )
        .unwrap();
        PayoffEngine::new(m).unwrap()
    }

    fn fig2(lambda: f64) -> PayoffEngine<f64> {
        let m = PopulationModel::from_spreading_rates(
            lambda,
            &[0.1, 0.9],
            &[Rate::decimal(0.05).unwrap(), Rate::decimal(0.2).unwrap()],
            5.0,
            4.0,
            Some(Convention::LiteralEq2),
        )
        .unwrap();
        PayoffEngine::new(m).unwrap()
    }

    #[test]
    fn realized_cost() {
        let e = fig2(10.0);
        assert_eq!(e.realized_cost_off(&vec![0, 6].into()).unwrap(), 5.0);
        assert_eq!(e.realized_cost_off(&vec![0, 0].into()).unwrap(), 0.0);

        let m = PopulationModel::from_spreading_rates(
            10.0,
            &[0.3, 0.7],
            &[Rate::decimal(0.5).unwrap(), Rate::decimal(0.98).unwrap()],
            10.0,
            4.0,
            None,
        )
        .unwrap();
        let e = PayoffEngine::new(m).unwrap();
        assert_eq!(e.realized_cost_off(&vec![3, 0].into()).unwrap(), 10.0);
    }

    #[test]
    fn safe_series_examples() {
        assert_eq!(fig2(10.0).safe_series(0.0), 1.0);
        let e = single(2.0, 10.0, 5.0, 4.0);
        for p in [0.0, 0.3, 1.0] {
            assert_eq!(e.safe_series(p), 1.0);
        }
        assert_relative_eq!(single(0.8, 10.0, 5.0, 4.0).safe_series(0.5), 6.0, epsilon = 1e-14);
    }

    #[test]
    fn threshold_exp_examples() {
        let e = single(2.0, 10.0, 5.0, 4.0);
        assert_relative_eq!(e.threshold_exp(0.0), 0.2, epsilon = 1e-15);
        // 0.2 e^10, reference from a 30-digit evaluation
        assert_relative_eq!(e.threshold_exp(1.0), 4405.293_158_961_343, max_relative = 1e-14);
        assert_eq!(single(2.0, 10.0, 5.0, 5.0).threshold_exp(0.7), 0.0);
    }

    #[test]
    fn expected_cost_off_examples() {
        let e = single(2.0, 10.0, 5.0, 4.0);
        assert_eq!(e.expected_cost_off(0.0), 0.0);
        assert!((e.expected_cost_off(0.16094) - 4.0).abs() < 1e-3);
        let e = fig2(30.0);
        for i in 0..=100 {
            assert!(e.expected_cost_off(i as f64 / 100.0) < 5.0);
        }
    }

    #[test]
    fn mixed_cost_is_affine() {
        let e = fig2(10.0);
        let p = 0.4;
        assert_eq!(e.expected_cost_mixed(0.0, p), 4.0);
        assert_eq!(e.expected_cost_mixed(1.0, p), e.expected_cost_off(p));
        let mid = e.expected_cost_mixed(0.5, p);
        assert_relative_eq!(mid, 0.5 * e.expected_cost_off(p) + 2.0, epsilon = 1e-14);
    }

    #[test]
    fn outcome_probability_examples() {
        let e = fig2(10.0);
        for p in [0.0, 0.2, 1.0] {
            let zero = e.outcome_probability(&vec![0, 0].into(), p).unwrap();
            assert_relative_eq!(zero, (-10.0 * p).exp(), max_relative = 1e-14);
        }
        assert_eq!(e.outcome_probability(&vec![1, 0].into(), 0.0).unwrap(), 0.0);
        // e^{-10} * 9^9 / 9!, reference 0.04847019 (direct product evaluated at 30 digits)
        let v = e.outcome_probability(&vec![1, 9].into(), 1.0).unwrap();
        assert_relative_eq!(v, 0.048_470_191_217_888_93, max_relative = 1e-12);
    }

    #[test]
    fn derived_engines_share_or_rebuild_safe_sets() {
        let e = fig2(10.0);
        let priced = e.with_price(2.0).unwrap();
        assert!(priced.safe_set().shares_points_with(e.safe_set()));
        assert_eq!(priced.protection_cost(), 2.0);
        let re = e.with_type_dist(&[0.5, 0.5]).unwrap();
        assert!(re.safe_set().shares_points_with(e.safe_set()));
        assert_ne!(re.safe_set().coeffs(), e.safe_set().coeffs());
        assert_eq!(re.safe_set().coeffs()[0], 1.0);
    }

    #[test]
    fn mismatched_safe_set_is_rejected() {
        let a = fig2(10.0);
        let other = PopulationModel::from_spreading_rates(
            10.0,
            &[0.1, 0.9],
            &[Rate::decimal(0.1).unwrap(), Rate::decimal(0.2).unwrap()],
            5.0,
            4.0,
            None,
        )
        .unwrap();
        let err = PayoffEngine::from_parts(other, a.safe_set().clone()).unwrap_err();
        assert!(matches!(err, Error::ModelMismatch { .. }));
        assert!(PayoffEngine::from_parts(a.model().clone(), a.safe_set().clone()).is_ok());
    }
}
