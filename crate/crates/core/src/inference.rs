//! Asymptotic variances, confidence intervals and symmetry bands for the
//! empirical expectile skewness `s2_n(alpha)` and the skewness function
//! `S_n(t)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{DistributionSpec, Sample};
use crate::error::{check_lower_alpha, check_probability, Result, SkewError};
use crate::expectile::{empirical_expectile, expectile, identification};
use crate::format::sig12;
use crate::law::Law;
use crate::skewness::{expectile_skewness, skewness_function};
use crate::special::normal_quantile;

/// Which expression to use for the asymptotic variance of `s2_n(alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaAlphaForm {
    /// Variance of the delta-method influence function. The mixed term
    /// `A(alpha) A(1-alpha) eta(alpha, 1-alpha)` carries a factor 2.
    #[default]
    DeltaMethod,
    /// The published three-term sum with a single mixed term. It understates
    /// the variance and can turn negative; kept for comparison only.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalEstimate {
    pub estimate: f64,
    /// Estimated asymptotic standard deviation of `sqrt(n) (estimate - truth)`.
    pub std_error: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub n: usize,
}

impl IntervalEstimate {
    fn new(estimate: f64, sigma_sq: f64, level: f64, n: usize) -> Self {
        let std_error = sigma_sq.max(0.0).sqrt();
        let half = halfwidth(std_error, level, n);
        IntervalEstimate {
            estimate,
            std_error,
            lower: estimate - half,
            upper: estimate + half,
            level,
            n,
        }
    }

    pub fn halfwidth(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// Limits intersected with `[lo, hi]`, e.g. `(-1, 1)` for `s2`.
    pub fn clipped(&self, lo: f64, hi: f64) -> Self {
        IntervalEstimate {
            lower: self.lower.max(lo),
            upper: self.upper.min(hi),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryBand {
    pub band_halfwidth: f64,
    pub statistic: f64,
    pub inside: bool,
    pub level: f64,
}

impl SymmetryBand {
    fn new(statistic: f64, sigma_sq: f64, level: f64, n: usize) -> Self {
        let band_halfwidth = halfwidth(sigma_sq.max(0.0).sqrt(), level, n);
        SymmetryBand {
            band_halfwidth,
            statistic,
            inside: statistic.abs() <= band_halfwidth,
            level,
        }
    }
}

fn halfwidth(std_error: f64, level: f64, n: usize) -> f64 {
    normal_quantile(0.5 + 0.5 * level) * std_error / (n as f64).sqrt()
}

fn check_level(level: f64) -> Result<()> {
    check_probability("level", level)
}

fn check_size(sample: &Sample, min: usize) -> Result<()> {
    if sample.len() < min {
        return Err(SkewError::domain(format!(
            "need at least {min} observations, got {}",
            sample.len()
        )));
    }
    Ok(())
}

/// `(1/n) sum I_{tau1}(e_n(tau1), X_i) I_{tau2}(e_n(tau2), X_i)`.
pub fn eta_hat(sample: &Sample, tau1: f64, tau2: f64) -> Result<f64> {
    check_size(sample, 2)?;
    let e1 = empirical_expectile(sample, tau1)?;
    let e2 = empirical_expectile(sample, tau2)?;
    let sum: f64 = sample
        .values()
        .iter()
        .map(|&x| identification(tau1, e1, x) * identification(tau2, e2, x))
        .sum();
    Ok(sum / sample.len() as f64)
}

/// Plug-in `A(tau) = (2 [tau < 1/2] - 1) (e_n(1-tau) - mean) / (tau + F_n(e_n(tau)) (1 - 2 tau))`.
/// Both `A(alpha)` and `A(1 - alpha)` are nonnegative.
pub fn a_hat(sample: &Sample, tau: f64) -> Result<f64> {
    check_size(sample, 2)?;
    check_probability("tau", tau)?;
    a_plugin(sample, tau)
}

fn a_plugin<L: Law + ?Sized>(law: &L, tau: f64) -> Result<f64> {
    let sign = if tau < 0.5 { 1.0 } else { -1.0 };
    let numer = law.expectile(1.0 - tau)? - law.mean();
    let denom = tau + law.cdf(law.expectile(tau)?) * (1.0 - 2.0 * tau);
    if !(denom > 0.0) {
        return Err(SkewError::numerical(format!("zero denominator in A({tau})")));
    }
    Ok(sign * numer / denom)
}

/// Ingredients of the variance shared by the population and plug-in forms.
struct SigmaParts {
    spread: f64,
    a_lo: f64,
    a_hi: f64,
    eta_lo_lo: f64,
    eta_lo_hi: f64,
    eta_hi_hi: f64,
    eta_lo_half: f64,
    eta_hi_half: f64,
    eta_half_half: f64,
}

impl SigmaParts {
    fn combine(&self, alpha: f64, form: SigmaAlphaForm) -> f64 {
        let d = self.spread;
        let mixed = match form {
            SigmaAlphaForm::DeltaMethod => 2.0,
            SigmaAlphaForm::AsPrinted => 1.0,
        };
        let first = 4.0 * self.eta_half_half / (d * d);
        let second = 4.0 * (self.a_lo * self.eta_lo_half + self.a_hi * self.eta_hi_half) / (d * d * d);
        let third = (self.a_lo * self.a_lo * self.eta_lo_lo
            + mixed * self.a_lo * self.a_hi * self.eta_lo_hi
            + self.a_hi * self.a_hi * self.eta_hi_hi)
            / (d * d * d * d);
        let c = 1.0 - 2.0 * alpha;
        4.0 / (c * c) * (first - second + third)
    }
}

/// Plug-in estimate of the asymptotic variance of `s2_n(alpha)`, using the
/// delta-method form.
pub fn sigma_alpha_sq_hat(sample: &Sample, alpha: f64) -> Result<f64> {
    sigma_alpha_sq_hat_with(sample, alpha, SigmaAlphaForm::default())
}

pub fn sigma_alpha_sq_hat_with(sample: &Sample, alpha: f64, form: SigmaAlphaForm) -> Result<f64> {
    check_lower_alpha(alpha)?;
    check_size(sample, 3)?;
    sample.require_nondegenerate()?;
    let e_lo = empirical_expectile(sample, alpha)?;
    let e_hi = empirical_expectile(sample, 1.0 - alpha)?;
    let mean = sample.mean();
    let (beta, n) = (1.0 - alpha, sample.len() as f64);
    let mut eta = [0.0_f64; 6];
    for &x in sample.values() {
        let i_lo = identification(alpha, e_lo, x);
        let i_hi = identification(beta, e_hi, x);
        let i_half = 0.5 * (x - mean);
        eta[0] += i_lo * i_lo;
        eta[1] += i_lo * i_hi;
        eta[2] += i_hi * i_hi;
        eta[3] += i_lo * i_half;
        eta[4] += i_hi * i_half;
        eta[5] += i_half * i_half;
    }
    let eta = eta.map(|s| s / n);
    let (a_lo, a_hi) = (a_plugin(sample, alpha)?, a_plugin(sample, beta)?);
    let spread = e_hi - e_lo;
    if form == SigmaAlphaForm::DeltaMethod {
        // the delta-method form is the mean square of the influence terms;
        // summing squares avoids the cancellation between the three parts
        // as alpha approaches 1/2
        let c = 1.0 - 2.0 * alpha;
        let sq: f64 = sample
            .values()
            .iter()
            .map(|&x| {
                let psi = 2.0 * (0.5 * (x - mean)) / spread
                    - (a_lo * identification(alpha, e_lo, x) + a_hi * identification(beta, e_hi, x))
                        / (spread * spread);
                psi * psi
            })
            .sum();
        return Ok(4.0 / (c * c) * sq / n);
    }
    let parts = SigmaParts {
        spread,
        a_lo,
        a_hi,
        eta_lo_lo: eta[0],
        eta_lo_hi: eta[1],
        eta_hi_hi: eta[2],
        eta_lo_half: eta[3],
        eta_hi_half: eta[4],
        eta_half_half: eta[5],
    };
    Ok(parts.combine(alpha, form))
}

/// Population asymptotic variance of `s2_n(alpha)`, with every expectation
/// evaluated by quadrature.
pub fn sigma_alpha_sq(dist: &DistributionSpec, alpha: f64, form: SigmaAlphaForm) -> Result<f64> {
    check_lower_alpha(alpha)?;
    dist.variance()?;
    let beta = 1.0 - alpha;
    let e_lo = expectile(dist, alpha)?;
    let e_hi = expectile(dist, beta)?;
    let mean = dist.mean();
    let breaks = [e_lo, mean, e_hi];
    let eta = |f: &dyn Fn(f64) -> f64| dist.expect(f, &breaks);
    let i_lo = |x: f64| identification(alpha, e_lo, x);
    let i_hi = |x: f64| identification(beta, e_hi, x);
    let i_half = |x: f64| 0.5 * (x - mean);
    let parts = SigmaParts {
        spread: e_hi - e_lo,
        a_lo: a_plugin(dist, alpha)?,
        a_hi: a_plugin(dist, beta)?,
        eta_lo_lo: eta(&|x| i_lo(x) * i_lo(x))?,
        eta_lo_hi: eta(&|x| i_lo(x) * i_hi(x))?,
        eta_hi_hi: eta(&|x| i_hi(x) * i_hi(x))?,
        eta_lo_half: eta(&|x| i_lo(x) * i_half(x))?,
        eta_hi_half: eta(&|x| i_hi(x) * i_half(x))?,
        eta_half_half: dist.variance()? / 4.0,
    };
    Ok(parts.combine(alpha, form))
}

pub fn s2_confidence_interval(sample: &Sample, alpha: f64, level: f64) -> Result<IntervalEstimate> {
    s2_confidence_interval_with(sample, alpha, level, SigmaAlphaForm::default())
}

pub fn s2_confidence_interval_with(
    sample: &Sample,
    alpha: f64,
    level: f64,
    form: SigmaAlphaForm,
) -> Result<IntervalEstimate> {
    check_level(level)?;
    let sigma_sq = sigma_alpha_sq_hat_with(sample, alpha, form)?;
    let estimate = expectile_skewness(sample, alpha, true)?;
    Ok(IntervalEstimate::new(estimate, sigma_sq, level, sample.len()))
}

pub fn s2_symmetry_band(sample: &Sample, alpha: f64, level: f64) -> Result<SymmetryBand> {
    s2_symmetry_band_with(sample, alpha, level, SigmaAlphaForm::default())
}

pub fn s2_symmetry_band_with(sample: &Sample, alpha: f64, level: f64, form: SigmaAlphaForm) -> Result<SymmetryBand> {
    check_level(level)?;
    let sigma_sq = sigma_alpha_sq_hat_with(sample, alpha, form)?;
    let statistic = expectile_skewness(sample, alpha, true)?;
    Ok(SymmetryBand::new(statistic, sigma_sq, level, sample.len()))
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(SkewError::domain(format!("t = {t} must be positive and finite")))
    }
}

/// Plug-in variance of `S_n(t)`: the empirical variance of
/// `(X_i - m - t)_+ - (X_i - m + t)_+ + (X_i - m) p_t` over `t^2`, with `m`
/// the sample mean and `p_t` the share of observations in `(m - t, m + t]`.
pub fn sigma_t_sq_hat(sample: &Sample, t: f64) -> Result<f64> {
    check_t(t)?;
    check_size(sample, 2)?;
    let m = sample.mean();
    let n = sample.len() as f64;
    let p = (sample.count_le(m + t) - sample.count_le(m - t)) as f64 / n;
    let terms: Vec<f64> = sample
        .values()
        .iter()
        .map(|&x| {
            let c = x - m;
            (c - t).max(0.0) - (c + t).max(0.0) + c * p
        })
        .collect();
    let centre = terms.iter().sum::<f64>() / n;
    let var = terms.iter().map(|b| (b - centre) * (b - centre)).sum::<f64>() / n;
    Ok(var / (t * t))
}

/// Population `sigma_t^2 = Var((X - mu - t)_+ - (X - mu + t)_+ + (X - mu) p) / t^2`,
/// `p = F(mu + t) - F(mu - t)`.
pub fn sigma_t_sq(dist: &DistributionSpec, t: f64) -> Result<f64> {
    check_t(t)?;
    dist.variance()?;
    let mu = dist.mean();
    let p = dist.cdf(mu + t) - dist.cdf(mu - t);
    let b = |x: f64| {
        let c = x - mu;
        (c - t).max(0.0) - (c + t).max(0.0) + c * p
    };
    let second = dist.expect(|x| b(x) * b(x), &[mu - t, mu, mu + t])?;
    let first = dist.stop_loss(mu + t) - dist.stop_loss(mu - t);
    Ok((second - first * first) / (t * t))
}

pub fn sfunc_confidence_interval(sample: &Sample, t: f64, level: f64) -> Result<IntervalEstimate> {
    check_level(level)?;
    let sigma_sq = sigma_t_sq_hat(sample, t)?;
    let estimate = skewness_function(sample, t)?;
    Ok(IntervalEstimate::new(estimate, sigma_sq, level, sample.len()))
}

pub fn sfunc_symmetry_band(sample: &Sample, t: f64, level: f64) -> Result<SymmetryBand> {
    check_level(level)?;
    let sigma_sq = sigma_t_sq_hat(sample, t)?;
    let statistic = skewness_function(sample, t)?;
    Ok(SymmetryBand::new(statistic, sigma_sq, level, sample.len()))
}

/// One grid point of an exported curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub param: f64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub band_halfwidth: f64,
    pub inside: bool,
}

impl CurveRow {
    fn from_parts(param: f64, ci: IntervalEstimate, band: SymmetryBand) -> Self {
        CurveRow {
            param,
            estimate: ci.estimate,
            lower: ci.lower,
            upper: ci.upper,
            band_halfwidth: band.band_halfwidth,
            inside: band.inside,
        }
    }
}

/// `s2_n(alpha)` with its interval and symmetry band along an alpha-grid.
pub fn s2_curve(sample: &Sample, alphas: &[f64], level: f64, form: SigmaAlphaForm) -> Result<Vec<CurveRow>> {
    alphas
        .par_iter()
        .map(|&a| {
            let ci = s2_confidence_interval_with(sample, a, level, form)?;
            let band = s2_symmetry_band_with(sample, a, level, form)?;
            Ok(CurveRow::from_parts(a, ci, band))
        })
        .collect()
}

/// `S_n(t)` with its interval and symmetry band along a t-grid.
pub fn sfunc_curve(sample: &Sample, ts: &[f64], level: f64) -> Result<Vec<CurveRow>> {
    ts.par_iter()
        .map(|&t| {
            let ci = sfunc_confidence_interval(sample, t, level)?;
            let band = sfunc_symmetry_band(sample, t, level)?;
            Ok(CurveRow::from_parts(t, ci, band))
        })
        .collect()
}

pub fn curve_to_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("param,estimate,lower,upper,band_halfwidth,inside\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            sig12(r.param),
            sig12(r.estimate),
            sig12(r.lower),
            sig12(r.upper),
            sig12(r.band_halfwidth),
            r.inside
        ));
    }
    out
}
