//! Scalar skewness measures and skewness functions.
//!
//! Every measure is generic over [`SkewSource`], implemented by
//! [`DistributionSpec`] (population values) and [`Sample`] (plug-in
//! estimates). Conventions for samples: quantiles are the generalised inverse
//! `x_(ceil(n p))`, the empirical cdf is right-continuous, and central
//! moments are normalised by `1/n`.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{DistributionSpec, Family, Sample};
use crate::error::{check_lower_alpha, Result, SkewError};
use crate::expectile::omega_ratio;
use crate::format::sig12;
use crate::law::Law;
use crate::quadrature::{gauss_legendre, integrate, QuadTolerance};

/// A law or sample on which all skewness measures are defined.
pub trait SkewSource: Law {
    /// `E(X - EX)^3 / Var(X)^{3/2}`.
    fn moment_skewness(&self) -> Result<f64>;
    /// L-skewness `tau_3 = lambda_3 / lambda_2`.
    fn l_skewness(&self) -> Result<f64>;
}

impl SkewSource for DistributionSpec {
    fn moment_skewness(&self) -> Result<f64> {
        DistributionSpec::moment_skewness(self)
    }

    fn l_skewness(&self) -> Result<f64> {
        let (l2, l3) = population_l_moments(self)?;
        Ok(l3 / l2)
    }
}

impl SkewSource for Sample {
    fn moment_skewness(&self) -> Result<f64> {
        self.require_nondegenerate()?;
        let m2 = self.central_moment(2);
        let m3 = self.central_moment(3);
        Ok(m3 / (m2 * m2.sqrt()))
    }

    fn l_skewness(&self) -> Result<f64> {
        let (l2, l3) = sample_l_moments(self)?;
        Ok(l3 / l2)
    }
}

pub fn moment_skewness<S: SkewSource + ?Sized>(source: &S) -> Result<f64> {
    source.moment_skewness()
}

/// `b_2(alpha) = (q(1-alpha) + q(alpha) - 2 q(1/2)) / (q(1-alpha) - q(alpha))`.
pub fn quantile_skewness<S: SkewSource + ?Sized>(source: &S, alpha: f64) -> Result<f64> {
    check_lower_alpha(alpha)?;
    let lo = source.quantile(alpha)?;
    let hi = source.quantile(1.0 - alpha)?;
    let med = source.quantile(0.5)?;
    let spread = hi - lo;
    if !(spread > 0.0) {
        return Err(SkewError::degenerate(format!(
            "quantile spread q({}) - q({alpha}) is zero",
            1.0 - alpha
        )));
    }
    Ok((hi + lo - 2.0 * med) / spread)
}

/// Expectile skewness `(e(1-alpha) + e(alpha) - 2 mu) / (e(1-alpha) - e(alpha))`,
/// divided by `1 - 2 alpha` when `normalized` so that it ranges over `(-1, 1)`.
pub fn expectile_skewness<S: SkewSource + ?Sized>(source: &S, alpha: f64, normalized: bool) -> Result<f64> {
    check_lower_alpha(alpha)?;
    source.ensure_nondegenerate()?;
    let lo = source.expectile(alpha)?;
    let hi = source.expectile(1.0 - alpha)?;
    let spread = hi - lo;
    if !(spread > 0.0) {
        return Err(SkewError::degenerate(format!(
            "expectile spread at alpha = {alpha} is zero"
        )));
    }
    let raw = (hi + lo - 2.0 * source.mean()) / spread;
    Ok(if normalized { raw / (1.0 - 2.0 * alpha) } else { raw })
}

/// `s_3 = 2 F(mu) - 1`; for samples the right-continuous empirical cdf is
/// used, so observations equal to the mean count fully.
pub fn tajuddin_s3<S: SkewSource + ?Sized>(source: &S) -> Result<f64> {
    Ok(2.0 * source.cdf(source.mean()) - 1.0)
}

pub fn l_skewness<S: SkewSource + ?Sized>(source: &S) -> Result<f64> {
    source.l_skewness()
}

/// `S(t) = (pi(mu + t) - pi(mu - t)) / t + 1`. For a sample this is the
/// plug-in `S_n(t)` centred at the sample mean.
pub fn skewness_function<S: SkewSource + ?Sized>(source: &S, t: f64) -> Result<f64> {
    check_positive_t(t)?;
    let mu = source.mean();
    Ok((source.stop_loss(mu + t) - source.stop_loss(mu - t)) / t + 1.0)
}

/// The same function through `(1/t) int_{mu-t}^{mu+t} F(z) dz - 1`, by
/// adaptive quadrature. Used to cross-check the stop-loss form.
pub fn skewness_function_by_integral(dist: &DistributionSpec, t: f64) -> Result<f64> {
    check_positive_t(t)?;
    let mu = dist.mean();
    let tol = QuadTolerance {
        atol: 1e-13,
        rtol: 1e-13,
        max_intervals: 4000,
    };
    let (lo, hi) = dist.support();
    // the cdf is flat outside the support; splitting there keeps the rule
    // away from the kinks
    let mut edges = vec![mu - t];
    edges.extend([lo, mu, hi].into_iter().filter(|&x| x > mu - t && x < mu + t));
    edges.push(mu + t);
    edges.sort_by(f64::total_cmp);
    let mut area = 0.0;
    for w in edges.windows(2) {
        area += integrate(|z| dist.cdf(z), w[0], w[1], tol)?;
    }
    Ok(area / t - 1.0)
}

/// Scale-free version `S(t * delta)` with `delta = E|X - mu|`.
pub fn scaled_skewness_function<S: SkewSource + ?Sized>(source: &S, t: f64) -> Result<f64> {
    check_positive_t(t)?;
    source.ensure_nondegenerate()?;
    skewness_function(source, t * source.mad())
}

/// `Omega(mu + t) * Omega(mu - t)`; at least one for every `t > 0` exactly
/// when the law is right-skewed.
pub fn omega_product<S: Law + ?Sized>(source: &S, t: f64) -> Result<f64> {
    check_positive_t(t)?;
    let mu = source.mean();
    Ok(omega_ratio(source, mu + t)? * omega_ratio(source, mu - t)?)
}

fn check_positive_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(SkewError::domain(format!("t = {t} must be positive and finite")))
    }
}

/// Dyadic panels of `(0, 1/2]` shrink toward 0 down to this depth; each gets
/// the 128-point Gauss-Legendre rule.
const L_MOMENT_DEPTH: i32 = 120;

fn gl128() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(128))
}

/// Population `(lambda_2, lambda_3)` from
/// `lambda_2 = int q(u) (2u - 1) du` and `lambda_3 = int q(u) (6u^2 - 6u + 1) du`.
///
/// Both halves of the unit interval are integrated from their endpoint
/// inward on a dyadic partition, so the endpoint singularities of `q` only
/// ever meet short panels. Upper-half quantiles come from
/// [`DistributionSpec::quantile_upper`] to keep precision near `u = 1`.
pub fn population_l_moments(dist: &DistributionSpec) -> Result<(f64, f64)> {
    if let Family::Bernoulli { p } = dist.family() {
        // canonical two-point laws have positive scale
        let s = dist.scale();
        let l2 = s * p * (1.0 - p);
        return Ok((l2, l2 * (1.0 - 2.0 * p)));
    }
    let (nodes, weights) = gl128();
    let centre = dist.quantile(0.5)?;
    let mut l2 = 0.0;
    let mut l3 = 0.0;
    let mut upper_edge = 0.5_f64;
    for depth in 1..=L_MOMENT_DEPTH + 1 {
        let lower_edge = if depth > L_MOMENT_DEPTH { 0.0 } else { 0.5 * upper_edge };
        let half = 0.5 * (upper_edge - lower_edge);
        let mid = 0.5 * (upper_edge + lower_edge);
        for (x, w) in nodes.iter().zip(weights) {
            let v = mid + half * x;
            let wv = w * half;
            let p3 = 6.0 * v * v - 6.0 * v + 1.0;
            let below = dist.quantile(v)? - centre;
            let above = dist.quantile_upper(v)? - centre;
            // u = v on the lower half, u = 1 - v on the upper half
            l2 += wv * ((2.0 * v - 1.0) * below + (1.0 - 2.0 * v) * above);
            l3 += wv * p3 * (below + above);
        }
        upper_edge = lower_edge;
    }
    Ok((l2, l3))
}

/// Unbiased sample `(l_2, l_3)` from probability-weighted moments.
pub fn sample_l_moments(sample: &Sample) -> Result<(f64, f64)> {
    let n = sample.len();
    if n < 3 {
        return Err(SkewError::domain(format!("L-skewness needs at least 3 observations, got {n}")));
    }
    sample.require_nondegenerate()?;
    let nf = n as f64;
    let centre = sample.mean();
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    for (i, x) in sample.sorted().iter().enumerate() {
        let x = x - centre;
        let i = i as f64;
        b0 += x;
        b1 += x * i / (nf - 1.0);
        b2 += x * i * (i - 1.0) / ((nf - 1.0) * (nf - 2.0));
    }
    let (b0, b1, b2) = (b0 / nf, b1 / nf, b2 / nf);
    let l2 = 2.0 * b1 - b0;
    let l3 = 6.0 * b2 - 6.0 * b1 + b0;
    Ok((l2, l3))
}

/// One grid entry of a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridValue {
    pub param: f64,
    pub value: f64,
}

/// All measures evaluated for one source.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkewnessReport {
    pub source: String,
    /// `None` when the third moment does not exist.
    pub gamma_m: Option<f64>,
    pub b2: Vec<GridValue>,
    pub s2_raw: Vec<GridValue>,
    pub s2: Vec<GridValue>,
    pub s3: f64,
    /// `None` for samples with fewer than three observations.
    pub tau3: Option<f64>,
    pub s_function: Vec<GridValue>,
    pub s_function_scaled: Vec<GridValue>,
    /// Why optional entries are missing.
    pub notes: Vec<String>,
}

impl SkewnessReport {
    /// Evaluates every measure on the given `alpha` and `t` grids. A point
    /// mass is rejected up front with a degenerate-input error.
    pub fn compute<S: SkewSource + Sync + ?Sized>(source: &S, alphas: &[f64], ts: &[f64]) -> Result<Self> {
        source.ensure_nondegenerate()?;
        for &a in alphas {
            check_lower_alpha(a)?;
        }
        for &t in ts {
            check_positive_t(t)?;
        }
        let mut notes = Vec::new();
        let gamma_m = match source.moment_skewness() {
            Ok(v) => Some(v),
            Err(SkewError::Domain(msg)) => {
                notes.push(format!("gamma_m: {msg}"));
                None
            }
            Err(e) => return Err(e),
        };
        let tau3 = match source.l_skewness() {
            Ok(v) => Some(v),
            Err(SkewError::Domain(msg)) => {
                notes.push(format!("tau3: {msg}"));
                None
            }
            Err(e) => return Err(e),
        };
        let grid = |params: &[f64], f: &(dyn Fn(f64) -> Result<f64> + Sync)| -> Result<Vec<GridValue>> {
            params
                .par_iter()
                .map(|&param| f(param).map(|value| GridValue { param, value }))
                .collect()
        };
        Ok(SkewnessReport {
            source: source.describe(),
            gamma_m,
            b2: grid(alphas, &|a| quantile_skewness(source, a))?,
            s2_raw: grid(alphas, &|a| expectile_skewness(source, a, false))?,
            s2: grid(alphas, &|a| expectile_skewness(source, a, true))?,
            s3: tajuddin_s3(source)?,
            tau3,
            s_function: grid(ts, &|t| skewness_function(source, t))?,
            s_function_scaled: grid(ts, &|t| scaled_skewness_function(source, t))?,
            notes,
        })
    }

    /// Long-format CSV `measure,parameter,value`; scalar measures leave the
    /// parameter empty and unavailable values are written as `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("measure,parameter,value\n");
        let scalar = |out: &mut String, name: &str, v: Option<f64>| {
            let v = v.map(sig12).unwrap_or_else(|| "NA".into());
            out.push_str(&format!("{name},,{v}\n"));
        };
        let series = |out: &mut String, name: &str, vals: &[GridValue]| {
            for g in vals {
                out.push_str(&format!("{name},{},{}\n", sig12(g.param), sig12(g.value)));
            }
        };
        scalar(&mut out, "gamma_m", self.gamma_m);
        series(&mut out, "b2", &self.b2);
        series(&mut out, "s2_raw", &self.s2_raw);
        series(&mut out, "s2", &self.s2);
        scalar(&mut out, "s3", Some(self.s3));
        scalar(&mut out, "tau3", self.tau3);
        series(&mut out, "s_function", &self.s_function);
        series(&mut out, "s_function_scaled", &self.s_function_scaled);
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
