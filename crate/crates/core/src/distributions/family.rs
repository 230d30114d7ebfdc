//! Standardised members of each parametric family (location 0, scale 1).
//! `DistributionSpec` layers an affine map on top of these.

use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, inv_beta_reg};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Result, SkewError};
use crate::roots::{expand_bracket, newton_bisect, Tolerance};
use crate::special::{normal_cdf, normal_pdf, normal_quantile, normal_sf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Normal,
    /// Gamma with shape `shape` and unit scale.
    Gamma { shape: f64 },
    /// `exp(N(0, log_var))`.
    LogNormal { log_var: f64 },
    StudentT { df: f64 },
    /// Unit-rate exponential.
    Exponential,
    /// Uniform on `[0, 1]`.
    Uniform,
    Bernoulli { p: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::Gamma { .. } => "gamma",
            Family::LogNormal { .. } => "lognormal",
            Family::StudentT { .. } => "student_t",
            Family::Exponential => "exponential",
            Family::Uniform => "uniform",
            Family::Bernoulli { .. } => "bernoulli",
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SkewError::Spec(msg));
        match *self {
            Family::Gamma { shape } if !(shape > 0.0 && shape.is_finite()) => {
                bad(format!("gamma shape must be positive, got {shape}"))
            }
            Family::LogNormal { log_var } if !(log_var > 0.0 && log_var.is_finite()) => {
                bad(format!("lognormal log-variance must be positive, got {log_var}"))
            }
            Family::StudentT { df } if !(df > 1.0 && df.is_finite()) => bad(format!(
                "student_t needs df > 1 for a finite mean, got {df}"
            )),
            Family::Bernoulli { p } if !(p > 0.0 && p < 1.0) => {
                bad(format!("bernoulli p must lie in (0, 1), got {p}"))
            }
            _ => Ok(()),
        }
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, Family::Bernoulli { .. })
    }

    /// Whether `-Z` has the same law as `Z` (possibly after a shift).
    pub(crate) fn is_symmetric(&self) -> bool {
        matches!(self, Family::Normal | Family::StudentT { .. } | Family::Uniform)
    }

    pub(crate) fn support(&self) -> (f64, f64) {
        match self {
            Family::Normal | Family::StudentT { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Family::Gamma { .. } | Family::LogNormal { .. } | Family::Exponential => (0.0, f64::INFINITY),
            Family::Uniform | Family::Bernoulli { .. } => (0.0, 1.0),
        }
    }

    pub(crate) fn mean(&self) -> f64 {
        match *self {
            Family::Normal | Family::StudentT { .. } => 0.0,
            Family::Gamma { shape } => shape,
            Family::LogNormal { log_var } => (0.5 * log_var).exp(),
            Family::Exponential => 1.0,
            Family::Uniform => 0.5,
            Family::Bernoulli { p } => p,
        }
    }

    pub(crate) fn variance(&self) -> Result<f64> {
        Ok(match *self {
            Family::Normal | Family::Exponential => 1.0,
            Family::Gamma { shape } => shape,
            Family::LogNormal { log_var } => log_var.exp_m1() * log_var.exp(),
            Family::StudentT { df } => {
                if df <= 2.0 {
                    return Err(SkewError::domain(format!(
                        "student_t variance needs df > 2, got {df}"
                    )));
                }
                df / (df - 2.0)
            }
            Family::Uniform => 1.0 / 12.0,
            Family::Bernoulli { p } => p * (1.0 - p),
        })
    }

    pub(crate) fn moment_skewness(&self) -> Result<f64> {
        Ok(match *self {
            Family::Normal | Family::Uniform => 0.0,
            Family::Gamma { shape } => 2.0 / shape.sqrt(),
            Family::LogNormal { log_var } => (log_var.exp() + 2.0) * log_var.exp_m1().sqrt(),
            Family::StudentT { df } => {
                if df <= 3.0 {
                    return Err(SkewError::domain(format!(
                        "student_t moment skewness needs df > 3, got {df}"
                    )));
                }
                0.0
            }
            Family::Exponential => 2.0,
            Family::Bernoulli { p } => (1.0 - 2.0 * p) / (p * (1.0 - p)).sqrt(),
        })
    }

    pub(crate) fn cdf(&self, z: f64) -> f64 {
        match *self {
            Family::Normal => normal_cdf(z),
            Family::Gamma { shape } => {
                if z <= 0.0 {
                    0.0
                } else if z.is_infinite() {
                    1.0
                } else {
                    gamma_lr(shape, z)
                }
            }
            Family::LogNormal { log_var } => {
                if z <= 0.0 {
                    0.0
                } else {
                    normal_cdf(z.ln() / log_var.sqrt())
                }
            }
            Family::StudentT { df } => student_t_cdf(df, z),
            Family::Exponential => {
                if z <= 0.0 {
                    0.0
                } else {
                    -(-z).exp_m1()
                }
            }
            Family::Uniform => z.clamp(0.0, 1.0),
            Family::Bernoulli { p } => {
                if z < 0.0 {
                    0.0
                } else if z < 1.0 {
                    1.0 - p
                } else {
                    1.0
                }
            }
        }
    }

    /// `P(Z < z)`; differs from `cdf` only at atoms.
    pub(crate) fn cdf_left(&self, z: f64) -> f64 {
        match *self {
            Family::Bernoulli { p } => {
                if z <= 0.0 {
                    0.0
                } else if z <= 1.0 {
                    1.0 - p
                } else {
                    1.0
                }
            }
            _ => self.cdf(z),
        }
    }

    /// `P(Z > z)`, evaluated without cancellation in the upper tail.
    pub(crate) fn sf(&self, z: f64) -> f64 {
        match *self {
            Family::Normal => normal_sf(z),
            Family::Gamma { shape } => {
                if z <= 0.0 {
                    1.0
                } else if z.is_infinite() {
                    0.0
                } else {
                    gamma_ur(shape, z)
                }
            }
            Family::LogNormal { log_var } => {
                if z <= 0.0 {
                    1.0
                } else {
                    normal_sf(z.ln() / log_var.sqrt())
                }
            }
            Family::StudentT { df } => student_t_cdf(df, -z),
            Family::Exponential => {
                if z <= 0.0 {
                    1.0
                } else {
                    (-z).exp()
                }
            }
            _ => 1.0 - self.cdf(z),
        }
    }

    pub(crate) fn pdf(&self, z: f64) -> f64 {
        match *self {
            Family::Normal => normal_pdf(z),
            Family::Gamma { shape } => {
                if z < 0.0 {
                    0.0
                } else if z == 0.0 {
                    match shape.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => 1.0,
                        _ => 0.0,
                    }
                } else {
                    ((shape - 1.0) * z.ln() - z - ln_gamma(shape)).exp()
                }
            }
            Family::LogNormal { log_var } => {
                if z <= 0.0 {
                    0.0
                } else {
                    let s = log_var.sqrt();
                    normal_pdf(z.ln() / s) / (z * s)
                }
            }
            Family::StudentT { df } => student_t_pdf(df, z),
            Family::Exponential => {
                if z < 0.0 {
                    0.0
                } else {
                    (-z).exp()
                }
            }
            Family::Uniform => {
                if (0.0..=1.0).contains(&z) {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Bernoulli { .. } => f64::NAN,
        }
    }

    /// Generalised inverse `inf{z : F(z) >= p}` for `p` in `(0, 1)`.
    pub(crate) fn quantile(&self, p: f64) -> Result<f64> {
        Ok(match *self {
            Family::Normal => normal_quantile(p),
            Family::Gamma { shape } => gamma_quantile(shape, p)?,
            Family::LogNormal { log_var } => (log_var.sqrt() * normal_quantile(p)).exp(),
            Family::StudentT { df } => student_t_quantile(df, p)?,
            Family::Exponential => -(-p).ln_1p(),
            Family::Uniform => p,
            Family::Bernoulli { p: success } => {
                if p <= 1.0 - success {
                    0.0
                } else {
                    1.0
                }
            }
        })
    }

    /// `F^{-1}(1 - q)` evaluated without forming `1 - q`, so upper-tail
    /// quantiles keep full relative accuracy for tiny `q`.
    pub(crate) fn quantile_upper(&self, q: f64) -> Result<f64> {
        Ok(match *self {
            Family::Normal => -normal_quantile(q),
            Family::Gamma { shape } => gamma_quantile_upper(shape, q)?,
            Family::LogNormal { log_var } => (-log_var.sqrt() * normal_quantile(q)).exp(),
            Family::StudentT { df } => -student_t_quantile(df, q)?,
            Family::Exponential => -q.ln(),
            Family::Uniform => 1.0 - q,
            Family::Bernoulli { p: success } => {
                if q >= success {
                    0.0
                } else {
                    1.0
                }
            }
        })
    }

    /// Stop-loss transform `E(Z - t)_+`.
    pub(crate) fn upper_partial(&self, t: f64) -> f64 {
        let mean = self.mean();
        match *self {
            Family::Normal => normal_pdf(t) - t * normal_sf(t),
            Family::Gamma { shape } => {
                if t <= 0.0 {
                    mean - t
                } else {
                    shape * gamma_ur(shape + 1.0, t) - t * gamma_ur(shape, t)
                }
            }
            Family::LogNormal { log_var } => {
                if t <= 0.0 {
                    mean - t
                } else {
                    let s = log_var.sqrt();
                    let d1 = (log_var - t.ln()) / s;
                    mean * normal_cdf(d1) - t * normal_cdf(d1 - s)
                }
            }
            Family::StudentT { df } => {
                (df + t * t) / (df - 1.0) * student_t_pdf(df, t) - t * student_t_cdf(df, -t)
            }
            Family::Exponential => {
                if t <= 0.0 {
                    mean - t
                } else {
                    (-t).exp()
                }
            }
            Family::Uniform => {
                if t <= 0.0 {
                    mean - t
                } else if t < 1.0 {
                    0.5 * (1.0 - t) * (1.0 - t)
                } else {
                    0.0
                }
            }
            Family::Bernoulli { p } => {
                if t <= 0.0 {
                    p - t
                } else if t < 1.0 {
                    p * (1.0 - t)
                } else {
                    0.0
                }
            }
        }
    }

    /// `E(Z - t)_- = E(t - Z)_+`, computed directly so it stays accurate
    /// where it is small.
    pub(crate) fn lower_partial(&self, t: f64) -> f64 {
        let mean = self.mean();
        match *self {
            Family::Normal => normal_pdf(t) + t * normal_cdf(t),
            Family::Gamma { shape } => {
                if t <= 0.0 {
                    0.0
                } else {
                    t * gamma_lr(shape, t) - shape * gamma_lr(shape + 1.0, t)
                }
            }
            Family::LogNormal { log_var } => {
                if t <= 0.0 {
                    0.0
                } else {
                    let s = log_var.sqrt();
                    let d1 = (log_var - t.ln()) / s;
                    t * normal_sf(d1 - s) - mean * normal_sf(d1)
                }
            }
            Family::StudentT { df } => {
                (df + t * t) / (df - 1.0) * student_t_pdf(df, t) + t * student_t_cdf(df, t)
            }
            Family::Exponential => {
                if t <= 0.0 {
                    0.0
                } else if t < 0.1 {
                    // t - 1 + e^{-t} = sum_{k>=2} (-t)^k / k!
                    let mut term = t * t / 2.0;
                    let mut sum = 0.0_f64;
                    let mut k = 2.0;
                    while term.abs() > 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
                        sum += term;
                        k += 1.0;
                        term *= -t / k;
                    }
                    sum
                } else {
                    t + (-t).exp_m1()
                }
            }
            Family::Uniform => {
                if t <= 0.0 {
                    0.0
                } else if t < 1.0 {
                    0.5 * t * t
                } else {
                    t - mean
                }
            }
            Family::Bernoulli { p } => {
                if t <= 0.0 {
                    0.0
                } else if t < 1.0 {
                    (1.0 - p) * t
                } else {
                    t - p
                }
            }
        }
    }
}

fn student_t_cdf(df: f64, z: f64) -> f64 {
    if z.is_infinite() {
        return if z > 0.0 { 1.0 } else { 0.0 };
    }
    let z2 = z * z;
    // Pick the incomplete-beta argument that avoids cancellation near 0.
    let half_tail = if z2 < df {
        0.5 - 0.5 * beta_reg(0.5, 0.5 * df, z2 / (df + z2))
    } else {
        let r = df.sqrt() / z.abs();
        let w = r * r / (1.0 + r * r);
        if w > 1e-20 {
            0.5 * beta_reg(0.5 * df, 0.5, w)
        } else {
            // I_w(a, 1/2) = w^a / (a B(a, 1/2)) (1 + O(w)), in logs so that
            // the far tail does not underflow through w
            let a = 0.5 * df;
            let ln_w = df.ln() - 2.0 * z.abs().ln();
            let ln_beta = ln_gamma(a) + ln_gamma(0.5) - ln_gamma(a + 0.5);
            0.5 * (a * ln_w - a.ln() - ln_beta).exp()
        }
    };
    if z > 0.0 {
        1.0 - half_tail
    } else {
        half_tail
    }
}

fn student_t_pdf(df: f64, z: f64) -> f64 {
    let log_norm = ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) - 0.5 * (df * std::f64::consts::PI).ln();
    (log_norm - 0.5 * (df + 1.0) * (z * z / df).ln_1p()).exp()
}

fn student_t_quantile(df: f64, p: f64) -> Result<f64> {
    if p == 0.5 {
        return Ok(0.0);
    }
    if p > 0.5 {
        return student_t_quantile(df, 1.0 - p).map(|q| -q);
    }
    // Lower half: start from the incomplete-beta inversion, or from the tail
    // asymptote F(-x) ~ K x^{-df} far out, then polish.
    let guess = if p >= 1e-8 {
        let x = inv_beta_reg(0.5 * df, 0.5, 2.0 * p);
        -(df * (1.0 - x) / x).sqrt()
    } else {
        let ln_k = ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) - 0.5 * (df * std::f64::consts::PI).ln()
            + 0.5 * (df - 1.0) * df.ln();
        -((ln_k - p.ln()) / df).exp()
    };
    let f = |z: f64| student_t_cdf(df, z) - p;
    let start = if guess.is_finite() && guess < 0.0 { guess } else { -1.0 };
    let (lo, hi) = expand_bracket(f, 2.0 * start - 1.0, 0.0, 4000)?;
    newton_bisect(
        |z| (f(z), student_t_pdf(df, z)),
        lo,
        hi,
        Some(start),
        Tolerance {
            rtol: 1e-14,
            ..Tolerance::default()
        },
    )
}

fn gamma_quantile(shape: f64, p: f64) -> Result<f64> {
    let log_norm = ln_gamma(shape);
    // Wilson-Hilferty and the small-x power law; keep whichever is closer.
    let z = normal_quantile(p);
    let wh = shape * (1.0 - 1.0 / (9.0 * shape) + z / (3.0 * shape.sqrt())).powi(3);
    let small = ((p.ln() + ln_gamma(shape + 1.0)) / shape).exp();
    let score = |x: f64| {
        if x > 0.0 && x.is_finite() {
            (gamma_lr(shape, x) - p).abs()
        } else {
            f64::INFINITY
        }
    };
    let guess = if score(wh) <= score(small) { wh } else { small };
    let guess = if guess > 0.0 && guess.is_finite() { guess } else { shape };

    // Solve in y = ln x so tiny quantiles keep full relative accuracy.
    let f = |y: f64| gamma_lr(shape, y.exp()) - p;
    let floor = f64::MIN_POSITIVE.ln();
    if f(floor) >= 0.0 {
        return Ok(0.0);
    }
    let mut hi = guess.ln().max(0.0) + 1.0;
    while f(hi) < 0.0 {
        hi += 1.0 + hi.abs();
        if hi > 710.0 {
            return Err(SkewError::numerical(format!(
                "gamma quantile for shape {shape}, p {p} overflowed"
            )));
        }
    }
    let y = newton_bisect(
        |y| {
            let x = y.exp();
            let dens = ((shape - 1.0) * y - x - log_norm).exp() * x;
            (f(y), dens)
        },
        floor,
        hi,
        Some(guess.ln()),
        Tolerance {
            rtol: 0.0,
            atol: 1e-14,
            max_iter: 500,
        },
    )?;
    Ok(y.exp())
}

/// Solves `Q(shape, x) = q` for the upper regularized incomplete gamma `Q`.
fn gamma_quantile_upper(shape: f64, q: f64) -> Result<f64> {
    if q > 0.5 {
        return gamma_quantile(shape, 1.0 - q);
    }
    let log_norm = ln_gamma(shape);
    let z = -normal_quantile(q);
    let wh = shape * (1.0 - 1.0 / (9.0 * shape) + z / (3.0 * shape.sqrt())).powi(3);
    let guess = if wh > 0.0 && wh.is_finite() { wh } else { shape.max(-q.ln()) };

    // Q is decreasing in y = ln x.
    let f = |y: f64| gamma_ur(shape, y.exp()) - q;
    let mut lo = guess.ln() - 1.0;
    while f(lo) < 0.0 {
        lo -= 1.0 + lo.abs();
    }
    let mut hi = guess.ln() + 1.0;
    while f(hi) > 0.0 {
        hi += 1.0 + 0.5 * hi.abs();
        if hi > 710.0_f64.ln() + 10.0 {
            return Err(SkewError::numerical(format!(
                "gamma upper quantile for shape {shape}, q {q} overflowed"
            )));
        }
    }
    let y = newton_bisect(
        |y| {
            let x = y.exp();
            let dens = ((shape - 1.0) * y - x - log_norm).exp() * x;
            (f(y), -dens)
        },
        lo,
        hi,
        Some(guess.ln()),
        Tolerance {
            rtol: 0.0,
            atol: 1e-14,
            max_iter: 500,
        },
    )?;
    Ok(y.exp())
}
