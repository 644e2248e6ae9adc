//! Game and epidemic parameters, the propagation predicate, and the safe set.
//!
//! Rates (`beta`, `delta_t`) are kept as exact rationals. A decimal input such
//! as `5.1` is read as the rational `51/10` (its shortest round-trip decimal
//! form), so the propagation boundary is always decided exactly. Each weight
//! `tau_t / (1 + tau_t) = beta / (beta + delta_t)` is scaled by the common
//! denominator of all weights, which turns the predicate into an integer
//! comparison `sum_t x_t * a_t > budget`.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::{ln_factorials, CompensatedSum, Scalar};

/// Default upper bound on the number of safe-set points.
pub const DEFAULT_SAFESET_CAP: usize = 10_000_000;

/// Tolerance on `sum_t r(t) = 1`, widened to a few ulps for `f32`.
pub const TYPE_DIST_TOL: f64 = 1e-12;

/// Exact nonnegative rate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rate(BigRational);

impl Rate {
    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(invalid("rate denominator is zero"));
        }
        Ok(Rate(BigRational::new(num.into(), den.into())))
    }

    /// Reads `x` as the decimal it prints as, e.g. `5.1` becomes `51/10`.
    pub fn decimal(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(invalid(format!("rate {x} is not finite")));
        }
        let repr = format!("{x:e}");
        let (mantissa, exp) = repr.split_once('e').expect("`{:e}` always has an exponent");
        let exp: i64 = exp.parse().expect("integer exponent");
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        let digits: BigInt = format!("{int_part}{frac_part}")
            .parse()
            .expect("decimal digits");
        let scale = exp - frac_part.len() as i64;
        let ten = BigInt::from(10);
        let value = if scale >= 0 {
            BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
        };
        Ok(Rate(value))
    }

    pub fn exact(&self) -> &BigRational {
        &self.0
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn to_scalar<T: Scalar>(&self) -> T {
        T::lit(ratio_to_f64(&self.0))
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
    })
}

/// How an outcome vector is read when deciding propagation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Convention {
    /// `x` counts every unprotected node; propagation iff `sum x_t w_t >= 1`.
    #[serde(rename = "literal", alias = "LITERAL_EQ2", alias = "literal_eq2")]
    LiteralEq2,
    /// `x` counts the *other* unprotected players; propagation iff
    /// `sum x_t w_t > 1 - max_t w_t`. For one type the safe counts are
    /// `0..=floor(delta / beta)`.
    #[serde(rename = "exclusive", alias = "SELF_EXCLUSIVE", alias = "self_exclusive")]
    SelfExclusive,
}

impl Convention {
    /// LITERAL_EQ2 for several types, SELF_EXCLUSIVE for a single type.
    pub fn default_for(num_types: usize) -> Self {
        if num_types == 1 {
            Convention::SelfExclusive
        } else {
            Convention::LiteralEq2
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Convention::LiteralEq2 => "LITERAL_EQ2",
            Convention::SelfExclusive => "SELF_EXCLUSIVE",
        }
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "literal" | "literal_eq2" => Ok(Convention::LiteralEq2),
            "exclusive" | "self_exclusive" => Ok(Convention::SelfExclusive),
            other => Err(Error::Config(format!("unknown convention `{other}`"))),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Number of OFF players of each type.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutcomeVector(pub Vec<u32>);

impl OutcomeVector {
    pub fn zeros(dim: usize) -> Self {
        OutcomeVector(vec![0; dim])
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&x| x as u64).sum()
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for OutcomeVector {
    fn from(v: Vec<u32>) -> Self {
        OutcomeVector(v)
    }
}

/// One player type: its share of the population and its recovery rate.
#[derive(Clone, Debug)]
pub struct PlayerType<T> {
    pub share: T,
    pub recovery: Rate,
}

/// All parameters of the protection game.
#[derive(Clone, Debug)]
pub struct PopulationModel<T> {
    lambda: T,
    types: Vec<PlayerType<T>>,
    contamination: Rate,
    infection_cost: T,
    protection_cost: T,
    convention: Convention,
}

impl<T: Scalar> PopulationModel<T> {
    /// `convention: None` picks [`Convention::default_for`] the number of types.
    pub fn new(
        lambda: T,
        types: Vec<PlayerType<T>>,
        contamination: Rate,
        infection_cost: T,
        protection_cost: T,
        convention: Option<Convention>,
    ) -> Result<Self> {
        let convention = convention.unwrap_or_else(|| Convention::default_for(types.len()));
        let model = PopulationModel {
            lambda,
            types,
            contamination,
            infection_cost,
            protection_cost,
            convention,
        };
        model.validate()?;
        Ok(model)
    }

    /// Builds a model from spreading rates directly (`beta = 1`, `delta_t = 1 / tau_t`).
    pub fn from_spreading_rates(
        lambda: T,
        shares: &[T],
        taus: &[Rate],
        infection_cost: T,
        protection_cost: T,
        convention: Option<Convention>,
    ) -> Result<Self> {
        if shares.len() != taus.len() {
            return Err(invalid("type shares and spreading rates differ in length"));
        }
        let types = shares
            .iter()
            .zip(taus)
            .map(|(&share, tau)| {
                if !tau.is_positive() {
                    return Err(invalid(format!("spreading rate {tau} must be > 0")));
                }
                Ok(PlayerType {
                    share,
                    recovery: Rate(tau.exact().recip()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            lambda,
            types,
            Rate(BigRational::one()),
            infection_cost,
            protection_cost,
            convention,
        )
    }

    fn validate(&self) -> Result<()> {
        if self.types.is_empty() {
            return Err(invalid("at least one player type is required"));
        }
        if !(self.lambda.is_finite() && self.lambda > T::zero()) {
            return Err(invalid(format!("lambda must be finite and > 0, got {}", self.lambda)));
        }
        if !self.contamination.is_positive() {
            return Err(invalid(format!(
                "contamination rate must be > 0, got {}",
                self.contamination
            )));
        }
        for (t, ty) in self.types.iter().enumerate() {
            if !ty.recovery.is_positive() {
                return Err(invalid(format!(
                    "recovery rate of type {} must be > 0, got {}",
                    t + 1,
                    ty.recovery
                )));
            }
            if !(ty.share.is_finite() && ty.share >= T::zero()) {
                return Err(invalid(format!("share of type {} must be >= 0", t + 1)));
            }
        }
        let total = self.types.iter().map(|ty| ty.share.as_f64()).sum::<f64>();
        let tol = TYPE_DIST_TOL.max(8.0 * T::epsilon().as_f64());
        if (total - 1.0).abs() > tol {
            return Err(invalid(format!("type shares sum to {total}, expected 1")));
        }
        if !(self.infection_cost.is_finite() && self.infection_cost > T::zero()) {
            return Err(invalid("infection cost K must be finite and > 0"));
        }
        if !(self.protection_cost.is_finite() && self.protection_cost >= T::zero()) {
            return Err(invalid("protection cost C must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn num_types(&self) -> usize {
        self.types.len()
    }

    pub fn types(&self) -> &[PlayerType<T>] {
        &self.types
    }

    pub fn type_dist(&self) -> Vec<T> {
        self.types.iter().map(|ty| ty.share).collect()
    }

    pub fn contamination(&self) -> &Rate {
        &self.contamination
    }

    pub fn infection_cost(&self) -> T {
        self.infection_cost
    }

    pub fn protection_cost(&self) -> T {
        self.protection_cost
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn with_lambda(&self, lambda: T) -> Result<Self> {
        let mut m = self.clone();
        m.lambda = lambda;
        m.validate()?;
        Ok(m)
    }

    pub fn with_protection_cost(&self, c: T) -> Result<Self> {
        let mut m = self.clone();
        m.protection_cost = c;
        m.validate()?;
        Ok(m)
    }

    pub fn with_infection_cost(&self, k: T) -> Result<Self> {
        let mut m = self.clone();
        m.infection_cost = k;
        m.validate()?;
        Ok(m)
    }

    pub fn with_convention(&self, convention: Convention) -> Self {
        let mut m = self.clone();
        m.convention = convention;
        m
    }

    pub fn with_type_dist(&self, shares: &[T]) -> Result<Self> {
        if shares.len() != self.types.len() {
            return Err(invalid("type distribution has the wrong length"));
        }
        let mut m = self.clone();
        for (ty, &s) in m.types.iter_mut().zip(shares) {
            ty.share = s;
        }
        m.validate()?;
        Ok(m)
    }

    /// Replaces the spreading rate of type `t` (0-based), keeping `beta`.
    pub fn with_spreading_rate(&self, t: usize, tau: &Rate) -> Result<Self> {
        if t >= self.types.len() {
            return Err(invalid(format!("type index {t} out of range")));
        }
        if !tau.is_positive() {
            return Err(invalid(format!("spreading rate {tau} must be > 0")));
        }
        let mut m = self.clone();
        m.types[t].recovery = Rate(self.contamination.exact() / tau.exact());
        m.validate()?;
        Ok(m)
    }

    /// `tau_t = beta / delta_t`.
    pub fn effective_rates(&self) -> Vec<T> {
        self.exact_spreading_rates()
            .iter()
            .map(|tau| T::lit(ratio_to_f64(tau)))
            .collect()
    }

    pub fn exact_spreading_rates(&self) -> Vec<BigRational> {
        self.types
            .iter()
            .map(|ty| self.contamination.exact() / ty.recovery.exact())
            .collect()
    }

    /// Exact weights `tau_t / (1 + tau_t)`.
    pub fn propagation_weights(&self) -> Vec<BigRational> {
        let beta = self.contamination.exact();
        self.types
            .iter()
            .map(|ty| beta / (beta + ty.recovery.exact()))
            .collect()
    }

    fn safety_budget(&self) -> SafetyBudget {
        SafetyBudget::new(&self.propagation_weights(), self.convention)
    }

    /// Whether the infection spreads network-wide for the outcome `x`.
    pub fn propagates(&self, x: &OutcomeVector) -> Result<bool> {
        if x.0.len() != self.types.len() {
            return Err(invalid(format!(
                "outcome vector has {} entries, model has {} types",
                x.0.len(),
                self.types.len()
            )));
        }
        Ok(self.safety_budget().propagates(&x.0))
    }

    /// Fingerprint of everything the safe set depends on.
    pub fn safe_set_fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.contamination.hash(&mut h);
        self.convention.hash(&mut h);
        for ty in &self.types {
            ty.recovery.hash(&mut h);
            ty.share.as_f64().to_bits().hash(&mut h);
        }
        h.finish()
    }

    pub fn enumerate_safe_set(&self) -> Result<SafeSet<T>> {
        self.enumerate_safe_set_capped(DEFAULT_SAFESET_CAP)
    }

    /// Enumerates `{x : !propagates(x)}`, failing once more than `cap` points are found.
    pub fn enumerate_safe_set_capped(&self, cap: usize) -> Result<SafeSet<T>> {
        let points = self.safety_budget().enumerate(cap)?;
        SafeSet::from_points(self, Arc::new(points))
    }

    /// Parses the JSON model document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ModelConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.build()
    }
}

/// Integer form of the propagation test: `x` propagates iff `sum x_t a_t > budget`.
#[derive(Clone, Debug)]
struct SafetyBudget {
    scaled: Vec<BigInt>,
    budget: BigInt,
}

impl SafetyBudget {
    fn new(weights: &[BigRational], convention: Convention) -> Self {
        let denom = weights
            .iter()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let scaled: Vec<BigInt> = weights
            .iter()
            .map(|w| w.numer() * (&denom / w.denom()))
            .collect();
        let budget = match convention {
            // sum < 1  <=>  sum * D <= D - 1
            Convention::LiteralEq2 => &denom - BigInt::one(),
            // sum <= 1 - max w
            Convention::SelfExclusive => {
                let max = scaled.iter().max().cloned().unwrap_or_else(BigInt::zero);
                &denom - max
            }
        };
        SafetyBudget { scaled, budget }
    }

    fn propagates(&self, x: &[u32]) -> bool {
        let load: BigInt = x
            .iter()
            .zip(&self.scaled)
            .map(|(&xi, a)| a * BigInt::from(xi))
            .sum();
        load > self.budget
    }

    fn enumerate(&self, cap: usize) -> Result<Vec<u32>> {
        let narrow: Option<Vec<u128>> = self.scaled.iter().map(|a| a.to_u128()).collect();
        match (narrow, self.budget.to_u128()) {
            (Some(scaled), Some(budget)) => enumerate_dfs(&scaled, budget, cap),
            _ => enumerate_dfs(&self.scaled, self.budget.clone(), cap),
        }
    }
}

/// Depth-first enumeration of `{x in N^T : sum x_t a_t <= budget}`, flattened row-major.
fn enumerate_dfs<I>(scaled: &[I], budget: I, cap: usize) -> Result<Vec<u32>>
where
    I: Integer + Clone + ToPrimitive,
{
    fn recurse<I: Integer + Clone + ToPrimitive>(
        scaled: &[I],
        depth: usize,
        remaining: I,
        prefix: &mut Vec<u32>,
        out: &mut Vec<u32>,
        cap: usize,
    ) -> Result<()> {
        let dim = scaled.len();
        if depth == dim {
            if out.len() / dim >= cap {
                return Err(Error::ResourceLimit { cap });
            }
            out.extend_from_slice(prefix);
            return Ok(());
        }
        let weight = &scaled[depth];
        let max = (remaining.clone() / weight.clone())
            .to_u32()
            .ok_or(Error::ResourceLimit { cap })?;
        let mut rest = remaining;
        for x in 0..=max {
            prefix.push(x);
            recurse(scaled, depth + 1, rest.clone(), prefix, out, cap)?;
            prefix.pop();
            if x < max {
                rest = rest - weight.clone();
            }
        }
        Ok(())
    }

    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(scaled.len());
    recurse(scaled, 0, budget, &mut prefix, &mut out, cap)?;
    Ok(out)
}

/// The finite set of outcome vectors that do not trigger propagation, with
/// its Poisson coefficients grouped by total count:
/// `c_n = sum_{x in S, |x| = n} prod_t r(t)^{x_t} / x_t!`.
#[derive(Clone, Debug)]
pub struct SafeSet<T> {
    dim: usize,
    points: Arc<Vec<u32>>,
    coeffs: Vec<T>,
    fingerprint: u64,
}

impl<T: Scalar> SafeSet<T> {
    fn from_points(model: &PopulationModel<T>, points: Arc<Vec<u32>>) -> Result<Self> {
        let dim = model.num_types();
        let shares = model.type_dist();
        let max_count = points.iter().copied().max().unwrap_or(0) as usize;
        let max_total = points
            .chunks_exact(dim)
            .map(|x| x.iter().map(|&v| v as usize).sum::<usize>())
            .max()
            .unwrap_or(0);
        let ln_fact = ln_factorials::<T>(max_count);
        let ln_share: Vec<T> = shares.iter().map(|r| r.ln()).collect();

        let mut buckets = vec![CompensatedSum::<T>::default(); max_total + 1];
        for x in points.chunks_exact(dim) {
            let mut log_term = T::zero();
            let mut total = 0usize;
            for (t, &xt) in x.iter().enumerate() {
                if xt == 0 {
                    continue;
                }
                log_term = log_term + T::from_count(xt as u64) * ln_share[t] - ln_fact[xt as usize];
                total += xt as usize;
            }
            buckets[total].add(log_term.exp());
        }
        let coeffs: Vec<T> = buckets.iter().map(|b| b.value()).collect();
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numerical("non-finite safe-set coefficient".into()));
        }
        Ok(SafeSet {
            dim,
            points,
            coeffs,
            fingerprint: model.safe_set_fingerprint(),
        })
    }

    /// Same lattice points, coefficients recomputed for another type distribution.
    pub fn reweighted(&self, model: &PopulationModel<T>) -> Result<Self> {
        if model.num_types() != self.dim {
            return Err(invalid("model has a different number of types"));
        }
        SafeSet::from_points(model, Arc::clone(&self.points))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.points.chunks_exact(self.dim)
    }

    pub fn contains(&self, x: &OutcomeVector) -> bool {
        x.0.len() == self.dim && self.points().any(|p| p == x.0.as_slice())
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn max_total(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn shares_points_with(&self, other: &SafeSet<T>) -> bool {
        Arc::ptr_eq(&self.points, &other.points)
    }
}

/// Epidemic threshold of a complete graph on `x` nodes: `1 / (x - 1)`.
pub fn critical_threshold_homogeneous<T: Scalar>(x: u64) -> Result<T> {
    if x <= 1 {
        return Err(Error::Domain(format!(
            "critical threshold needs at least 2 unprotected nodes, got {x}"
        )));
    }
    Ok(T::one() / T::from_count(x - 1))
}

/// `tau_t = beta / delta_t` for raw rates.
pub fn effective_rates<T: Scalar>(beta: &Rate, deltas: &[Rate]) -> Result<Vec<T>> {
    deltas
        .iter()
        .map(|d| {
            if !d.is_positive() {
                return Err(invalid(format!("recovery rate {d} must be > 0")));
            }
            Ok(T::lit(ratio_to_f64(&(beta.exact() / d.exact()))))
        })
        .collect()
}

/// A rate written either as a decimal or as an integer pair.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum RateSpec {
    Decimal(f64),
    Pair { num: i64, den: i64 },
}

impl RateSpec {
    pub fn to_rate(&self) -> Result<Rate> {
        match *self {
            RateSpec::Decimal(x) => Rate::decimal(x),
            RateSpec::Pair { num, den } => Rate::ratio(num, den),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TypeConfig {
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<RateSpec>,
    /// Alternative to `delta`: the spreading rate itself.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<RateSpec>,
}

/// JSON document describing a [`PopulationModel`].
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub lambda: f64,
    pub types: Vec<TypeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<RateSpec>,
    #[serde(rename = "K")]
    pub infection_cost: f64,
    #[serde(rename = "C")]
    pub protection_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<Convention>,
}

impl ModelConfig {
    pub fn build<T: Scalar>(&self) -> Result<PopulationModel<T>> {
        let beta = match &self.beta {
            Some(b) => b.to_rate()?,
            None => Rate::ratio(1, 1)?,
        };
        let types = self
            .types
            .iter()
            .enumerate()
            .map(|(t, ty)| {
                let recovery = match (&ty.delta, &ty.tau) {
                    (Some(d), None) => d.to_rate()?,
                    (None, Some(tau)) => {
                        let tau = tau.to_rate()?;
                        if !tau.is_positive() {
                            return Err(invalid(format!("tau of type {} must be > 0", t + 1)));
                        }
                        Rate(beta.exact() / tau.exact())
                    }
                    _ => {
                        return Err(Error::Config(format!(
                            "type {} needs exactly one of `delta` or `tau`",
                            t + 1
                        )))
                    }
                };
                Ok(PlayerType {
                    share: T::lit(ty.r),
                    recovery,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PopulationModel::new(
            T::lit(self.lambda),
            types,
            beta,
            T::lit(self.infection_cost),
            T::lit(self.protection_cost),
            self.convention,
        )
    }
}
