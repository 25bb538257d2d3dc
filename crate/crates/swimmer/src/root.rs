//! Bracketing and bisection on scalar response curves.

use crate::{Error, Result};

/// Finds a sign change of `f` on a log-spaced grid over `[lo, hi]`.
///
/// Returns the first bracketing subinterval. Non-finite samples are skipped so
/// response curves with restricted domains can still be scanned.
pub fn bracket<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    n: usize,
    what: &'static str,
) -> Result<(f64, f64)> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let ratio = (hi / lo).powf(1.0 / (n as f64 - 1.0));
    let mut prev: Option<(f64, f64)> = None;
    let mut x = lo;
    for _ in 0..n {
        let v = f(x);
        if v.is_finite() {
            if let Some((px, pv)) = prev {
                if pv == 0.0 {
                    return Ok((px, px));
                }
                if pv * v < 0.0 {
                    return Ok((px, x));
                }
            }
            prev = Some((x, v));
        }
        x *= ratio;
    }
    Err(Error::NoSignChange { what, lo, hi })
}

/// Bisects `f` to relative tolerance `rel_tol` on a bracketing interval.
pub fn bisect<F: Fn(f64) -> f64>(
    f: &F,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    what: &'static str,
) -> Result<f64> {
    if lo == hi {
        return Ok(lo);
    }
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo * fhi > 0.0 {
        return Err(Error::NoSignChange { what, lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= rel_tol * mid.abs() {
            return Ok(mid);
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if flo * fmid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_root() {
        let f = |x: f64| x * x - 2.0;
        let (lo, hi) = bracket(&f, 0.5, 4.0, 40, "sqrt2").unwrap();
        let root = bisect(&f, lo, hi, 1e-12, "sqrt2").unwrap();
        assert!((root - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn reports_missing_bracket() {
        let f = |x: f64| x * x + 1.0;
        assert!(matches!(
            bracket(&f, 0.1, 10.0, 20, "none"),
            Err(Error::NoSignChange { .. })
        ));
    }
}
