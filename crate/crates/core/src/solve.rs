//! Bracketing scalar solvers.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root<T> {
    pub x: T,
    /// `f(x)` at the returned point.
    pub value: T,
    pub iterations: usize,
}

/// Bisection for a sign change of `f` on `[lo, hi]`, stopping when the
/// bracket is no wider than `tol`.
pub fn bisect<T, F>(mut f: F, mut lo: T, mut hi: T, tol: T) -> Result<Root<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    if !(lo < hi) || !(tol > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "bisection needs lo < hi and tol > 0 (lo = {lo}, hi = {hi}, tol = {tol})"
        )));
    }
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(Error::Numerical(format!(
            "non-finite bracket values f({lo}) = {f_lo}, f({hi}) = {f_hi}"
        )));
    }
    if f_lo == T::zero() {
        return Ok(Root { x: lo, value: f_lo, iterations: 0 });
    }
    if f_hi == T::zero() {
        return Ok(Root { x: hi, value: f_hi, iterations: 0 });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Numerical(format!(
            "no sign change on [{lo}, {hi}]: f = {f_lo}, {f_hi}"
        )));
    }

    let two = T::lit(2.0);
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        iterations += 1;
        if !f_mid.is_finite() {
            return Err(Error::Numerical(format!("f({mid}) = {f_mid} during bisection")));
        }
        if f_mid == T::zero() {
            return Ok(Root { x: mid, value: f_mid, iterations });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let x = lo + (hi - lo) / two;
    Ok(Root { x, value: f(x), iterations })
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
/// Returns `(argmax, max)` once the bracket is narrower than `tol`.
pub fn golden_section_max<T, F>(mut f: F, mut a: T, mut b: T, tol: T) -> Result<(T, T)>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    if a > b || !(tol > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "golden section needs a <= b and tol > 0 (a = {a}, b = {b})"
        )));
    }
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        }
    }
    let x = (a + b) / T::lit(2.0);
    let fx = f(x)?;
    // the midpoint can lose to an interior probe on a flat top
    Ok([(x, fx), (x1, f1), (x2, f2)]
        .into_iter()
        .fold((x, fx), |best, c| if c.1 > best.1 { c } else { best }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-12);
        assert!(r.iterations > 30);
    }

    #[test]
    fn bisection_errors() {
        assert!(bisect(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-9).is_err());
        assert!(bisect(|x: f64| x, 1.0, 0.0, 1e-9).is_err());
        assert!(bisect(|x: f64| x, 0.0, 1.0, 0.0).is_err());
        assert!(matches!(
            bisect(|x: f64| 1.0 / x - 0.5 + f64::NAN * (x - 1.0), 1.0, 3.0, 1e-9),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn bisection_endpoint_root() {
        let r = bisect(|x: f64| x, 0.0, 1.0, 1e-9).unwrap();
        assert_eq!(r.x, 0.0);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn golden_section_quadratic() {
        let (x, fx) = golden_section_max(|c: f64| Ok(c * (10.0 - c)), 0.0, 10.0, 1e-9).unwrap();
        assert!((x - 5.0).abs() < 1e-6);
        assert!((fx - 25.0).abs() < 1e-12);
    }

    #[test]
    fn golden_section_monotone_goes_to_endpoint() {
        let (x, _) = golden_section_max(|c: f64| Ok(c), 0.0, 10.0, 1e-9).unwrap();
        assert!((x - 10.0).abs() < 1e-8);
    }
}
