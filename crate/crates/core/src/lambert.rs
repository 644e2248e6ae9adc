//! Lower real branch `W_{-1}` of the Lambert W function.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_ITER: usize = 64;

/// Slack accepted to the left of the branch point `-1/e`.
pub const BRANCH_POINT_SLACK: f64 = 1e-15;

/// Solves `w e^w = z` for `w <= -1`, with `-1/e <= z < 0`.
///
/// Halley iteration started from `ln(-z) - ln(-ln(-z))`; close to the branch
/// point the start comes from the series in `sqrt(2 (1 + e z))` instead, where
/// the logarithmic guess is poor.
pub fn lambert_w_minus1<T: Scalar>(z: T) -> Result<T> {
    let branch = -T::E().recip();
    if !z.is_finite() || z >= T::zero() || z < branch - T::lit(BRANCH_POINT_SLACK) {
        return Err(Error::Domain(format!(
            "W_-1 is defined on [-1/e, 0), got {z}"
        )));
    }
    if z <= branch {
        return Ok(-T::one());
    }

    let mut w = if z < T::lit(-0.25) {
        let p = -(T::lit(2.0) * (T::one() + T::E() * z)).sqrt();
        -T::one() + p - p * p / T::lit(3.0) + T::lit(11.0 / 72.0) * p * p * p
    } else {
        let l1 = (-z).ln();
        l1 - (-l1).ln()
    };
    if (w + T::one()).abs() < T::lit(1e-6) {
        // Series already exact to O(p^4); Halley's denominator vanishes here.
        return Ok(w.min(-T::one()));
    }

    let tol = T::lit(4.0) * T::epsilon();
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + T::one();
        let denom = ew * wp1 - (w + T::lit(2.0)) * f / (T::lit(2.0) * wp1);
        let step = f / denom;
        if !step.is_finite() {
            return Err(Error::Numerical(format!("Halley step diverged at z = {z}")));
        }
        w = w - step;
        if step.abs() <= tol * w.abs() {
            return Ok(w.min(-T::one()));
        }
    }
    Ok(w.min(-T::one()))
}
