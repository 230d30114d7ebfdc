//! Safeguarded Newton iteration on a sign-changing bracket.

use crate::error::{Result, SkewError};

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rtol: 1e-12,
            atol: 1e-300,
            max_iter: 500,
        }
    }
}

impl Tolerance {
    fn width(&self, x: f64) -> f64 {
        self.rtol * x.abs() + self.atol
    }
}

/// Midpoint of `[a, b]`, taken geometrically when both ends share a sign
/// and span several orders of magnitude.
fn split(a: f64, b: f64) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if lo > 0.0 && hi / lo > 1e3 {
        (lo * hi).sqrt()
    } else if hi < 0.0 && lo / hi > 1e3 {
        -(lo * hi).sqrt()
    } else {
        lo + 0.5 * (hi - lo)
    }
}

/// Finds a root of `f` in `[lo, hi]`, where `f` returns `(value, derivative)`.
///
/// Newton steps are taken from `start` (or the bracket midpoint) and replaced
/// by bisection whenever they leave the current bracket or fail to halve the
/// previous step. The bracket endpoints must give values of opposite sign.
pub fn newton_bisect<F>(mut f: F, lo: f64, hi: f64, start: Option<f64>, tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (flo, _) = f(lo);
    if flo == 0.0 {
        return Ok(lo);
    }
    let (fhi, _) = f(hi);
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(SkewError::numerical(format!(
            "no sign change on [{lo}, {hi}]: f = {flo}, {fhi}"
        )));
    }
    // `neg` always holds the endpoint with a negative function value.
    let (mut neg, mut pos) = if flo < 0.0 { (lo, hi) } else { (hi, lo) };
    let mut x = match start {
        Some(s) if s > lo.min(hi) && s < lo.max(hi) => s,
        _ => split(lo, hi),
    };
    let mut last_step = (hi - lo).abs();
    for _ in 0..tol.max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if !fx.is_finite() {
            return Err(SkewError::numerical(format!("non-finite value {fx} at {x}")));
        }
        if fx < 0.0 {
            neg = x;
        } else {
            pos = x;
        }
        let (a, b) = if neg < pos { (neg, pos) } else { (pos, neg) };
        if b - a <= tol.width(x) {
            return Ok(x);
        }
        let newton = x - fx / dfx;
        let usable = dfx.is_finite()
            && dfx != 0.0
            && newton > a
            && newton < b
            && (2.0 * fx).abs() <= (last_step * dfx).abs();
        let next = if usable { newton } else { split(a, b) };
        last_step = (next - x).abs();
        if last_step <= tol.width(next) {
            return Ok(next);
        }
        x = next;
    }
    Err(SkewError::numerical(format!(
        "root finder did not converge within {} iterations (bracket [{neg}, {pos}])",
        tol.max_iter
    )))
}

/// Widens `[lo, hi]` geometrically until the monotone function `f` changes
/// sign, or gives up after `max_doublings`.
pub fn expand_bracket<F>(mut f: F, mut lo: f64, mut hi: f64, max_doublings: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let mut flo = f(lo);
    let mut fhi = f(hi);
    for _ in 0..max_doublings {
        if flo.signum() != fhi.signum() || flo == 0.0 || fhi == 0.0 {
            return Ok((lo, hi));
        }
        let width = (hi - lo).max(1.0);
        // Move the end whose value is smaller in magnitude further out.
        if flo.abs() < fhi.abs() {
            lo -= width;
            flo = f(lo);
        } else {
            hi += width;
            fhi = f(hi);
        }
    }
    Err(SkewError::numerical(format!(
        "could not bracket a root; last interval [{lo}, {hi}]"
    )))
}

/// Plain bisection to full floating-point resolution. Kept free of
/// derivative information so tests can use it as an independent oracle.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let flo = f(lo);
    for _ in 0..2000 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + 0.5 * (hi - lo)
}
