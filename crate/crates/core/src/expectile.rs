//! Expectiles of parametric laws and samples, the expectile derivative,
//! Omega ratios and the expectile location/spread/asymmetry decomposition.
//!
//! The `alpha`-expectile is the unique zero of
//! `t -> alpha * E(X - t)_+ - (1 - alpha) * E(X - t)_-`, a continuous and
//! strictly decreasing function. For parametric laws the zero is found by
//! safeguarded Newton iteration (the derivative is
//! `-(alpha + (1 - 2 alpha) F(t))`); for samples the function is piecewise
//! linear between order statistics and the zero is computed exactly.

use serde::Serialize;

use crate::distributions::{DistributionSpec, Sample};
use crate::error::{check_lower_alpha, check_probability, Result, SkewError};
use crate::law::Law;
use crate::roots::{expand_bracket, newton_bisect, Tolerance};

/// Identification function `I_alpha(t, y)`; its mean over `y ~ X` vanishes
/// exactly at `t = e_X(alpha)`.
pub fn identification(alpha: f64, t: f64, y: f64) -> f64 {
    if y >= t {
        alpha * (y - t)
    } else {
        (1.0 - alpha) * (y - t)
    }
}

/// Theoretical `alpha`-expectile. Returns the mean at `alpha = 1/2`.
pub fn expectile(dist: &DistributionSpec, alpha: f64) -> Result<f64> {
    check_probability("alpha", alpha)?;
    let mean = dist.mean();
    if alpha == 0.5 {
        return Ok(mean);
    }
    let g = |t: f64| alpha * dist.stop_loss(t) - (1.0 - alpha) * dist.lower_partial(t);
    let slope = |t: f64| -(alpha + (1.0 - 2.0 * alpha) * dist.cdf(t));

    let (sup_lo, sup_hi) = dist.support();
    let lo = if sup_lo.is_finite() { sup_lo } else { dist.quantile(1e-12)? };
    let hi = if sup_hi.is_finite() { sup_hi } else { dist.quantile(1.0 - 1e-12)? };
    let spread = hi - lo;
    let (lo, hi) = expand_bracket(g, lo, hi, 200)?;
    newton_bisect(
        |t| (g(t), slope(t)),
        lo,
        hi,
        Some(mean),
        Tolerance {
            rtol: 4.0 * f64::EPSILON,
            atol: 1e-15 * spread,
            max_iter: 500,
        },
    )
}

/// Exact empirical `alpha`-expectile.
///
/// On each gap between consecutive order statistics the sample identification
/// function is affine; the gap holding the sign change is found by binary
/// search over the order statistics and the affine equation is solved there.
pub fn empirical_expectile(sample: &Sample, alpha: f64) -> Result<f64> {
    check_probability("alpha", alpha)?;
    let xs = sample.sorted();
    let below = sample.centred_prefix();
    let above = sample.centred_suffix();
    let mean = sample.mean();
    let n = xs.len();
    let beta = 1.0 - alpha;

    // n * (mean identification) at the knot u_j, with j points strictly below
    let at_knot = |j: usize| {
        let u = xs[j] - mean;
        alpha * (above[j] - (n - j) as f64 * u) + beta * (below[j] - j as f64 * u)
    };
    // largest j with a nonnegative value; knot 0 always qualifies
    let (mut lo, mut hi) = (0usize, n);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if at_knot(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let j = lo;
    if j + 1 == n || at_knot(j) == 0.0 {
        return Ok(xs[j]);
    }
    // Both sums enter symmetrically, so reflecting the sample and swapping
    // alpha for 1 - alpha negates every rounding step.
    let k = j + 1;
    let u = (alpha * above[k] + beta * below[k]) / (alpha * (n - k) as f64 + beta * k as f64);
    let (a, b) = (xs[j] - mean, xs[k] - mean);
    Ok(mean + u.clamp(a, b))
}

/// Derivative of `alpha -> e_X(alpha)`:
/// `E|X - e| / ((1 - alpha) F(e) + alpha (1 - F(e)))` with `e = e_X(alpha)`.
pub fn expectile_derivative(dist: &DistributionSpec, alpha: f64) -> Result<f64> {
    if !dist.is_continuous() {
        return Err(SkewError::Unsupported(format!(
            "expectile derivative needs a continuous cdf; {} has atoms",
            dist.family().name()
        )));
    }
    let e = expectile(dist, alpha)?;
    let abs_dev = dist.stop_loss(e) + dist.lower_partial(e);
    let f = dist.cdf(e);
    Ok(abs_dev / ((1.0 - alpha) * f + alpha * (1.0 - f)))
}

/// Omega ratio `E(X - t)_+ / E(X - t)_-`; undefined when no mass lies below `t`.
pub fn omega_ratio<L: Law + ?Sized>(law: &L, t: f64) -> Result<f64> {
    let down = law.lower_partial(t);
    if !(down > 0.0) {
        return Err(SkewError::OmegaUndefined { t });
    }
    Ok(law.stop_loss(t) / down)
}

/// `e(1 - alpha) = location + half_distance + asymmetry`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectileDecomposition {
    /// `e(1/2)`, the mean.
    pub location: f64,
    /// `(e(1 - alpha) - e(alpha)) / 2`.
    pub half_distance: f64,
    /// `(e(1 - alpha) + e(alpha) - 2 e(1/2)) / 2`; zero under symmetry.
    pub asymmetry: f64,
}

impl ExpectileDecomposition {
    pub fn upper_expectile(&self) -> f64 {
        self.location + self.half_distance + self.asymmetry
    }
}

pub fn expectile_decomposition<L: Law + ?Sized>(law: &L, alpha: f64) -> Result<ExpectileDecomposition> {
    check_lower_alpha(alpha)?;
    let lower = law.expectile(alpha)?;
    let upper = law.expectile(1.0 - alpha)?;
    let location = law.expectile(0.5)?;
    let half_distance = 0.5 * (upper - lower);
    // chosen so the three parts add back to `upper` without rounding drift
    let asymmetry = upper - location - half_distance;
    Ok(ExpectileDecomposition {
        location,
        half_distance,
        asymmetry,
    })
}

/// An expectile evaluation request against either kind of source.
#[derive(Debug, Clone, Copy)]
pub struct ExpectileQuery<'a, L: Law + ?Sized> {
    pub source: &'a L,
    pub alpha: f64,
}

impl<'a, L: Law + ?Sized> ExpectileQuery<'a, L> {
    pub fn new(source: &'a L, alpha: f64) -> Result<Self> {
        check_probability("alpha", alpha)?;
        Ok(ExpectileQuery { source, alpha })
    }

    pub fn evaluate(&self) -> Result<f64> {
        self.source.expectile(self.alpha)
    }
}
