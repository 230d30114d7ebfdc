//! Parametric distribution families and finite samples.
//!
//! A [`DistributionSpec`] is a standardised family member `Z` pushed through
//! an affine map, `X = loc + scale * Z`. Negative scales express reflections;
//! they are folded back into the family wherever the reflected law is again a
//! member (normal, Student t, uniform, Bernoulli).
//!
//! Closed forms are used for the cdf, quantile, mean, mean absolute deviation
//! and the stop-loss transform `E(X - t)_+`. The quadrature routines
//! ([`DistributionSpec::stop_loss_by_quadrature`] and friends) are a generic
//! fallback and serve as an independent check on the closed forms.

mod family;
mod rng;
mod sample;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub use family::Family;
pub use rng::{uniform_open01, UniformStream};
pub use sample::Sample;

use crate::error::{check_probability, Result, SkewError};
use crate::quadrature::{integrate, QuadTolerance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSpec {
    family: Family,
    loc: f64,
    scale: f64,
}

impl DistributionSpec {
    /// Builds `loc + scale * Z` for the standardised member `family`.
    pub fn new(family: Family, loc: f64, scale: f64) -> Result<Self> {
        family.validate()?;
        if !loc.is_finite() || !scale.is_finite() || scale == 0.0 {
            return Err(SkewError::Spec(format!(
                "affine map needs finite loc and nonzero finite scale, got loc = {loc}, scale = {scale}"
            )));
        }
        Ok(DistributionSpec { family, loc, scale }.canonical())
    }

    /// Normal with the given mean and variance.
    pub fn normal(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) {
            return Err(SkewError::Spec(format!("normal variance must be positive, got {variance}")));
        }
        Self::new(Family::Normal, mean, variance.sqrt())
    }

    /// Gamma with shape `k` and scale `theta`.
    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        Self::new(Family::Gamma { shape }, 0.0, scale)
    }

    /// `exp(N(log_mean, log_var))`.
    pub fn lognormal(log_mean: f64, log_var: f64) -> Result<Self> {
        Self::new(Family::LogNormal { log_var }, 0.0, log_mean.exp())
    }

    pub fn student_t(df: f64) -> Result<Self> {
        Self::new(Family::StudentT { df }, 0.0, 1.0)
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(SkewError::Spec(format!("exponential rate must be positive, got {rate}")));
        }
        Self::new(Family::Exponential, 0.0, 1.0 / rate)
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(SkewError::Spec(format!("uniform needs lo < hi, got [{lo}, {hi}]")));
        }
        Self::new(Family::Uniform, lo, hi - lo)
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(Family::Bernoulli { p }, 0.0, 1.0)
    }

    /// The law of `c * X + d`.
    pub fn affine(&self, c: f64, d: f64) -> Result<Self> {
        Self::new(self.family, c * self.loc + d, c * self.scale)
    }

    /// The law of `-X`.
    pub fn reflect(&self) -> Self {
        self.affine(-1.0, 0.0).expect("reflection keeps a valid spec")
    }

    fn canonical(self) -> Self {
        if self.scale > 0.0 {
            return self;
        }
        let s = -self.scale;
        match self.family {
            Family::Normal | Family::StudentT { .. } => DistributionSpec { scale: s, ..self },
            Family::Uniform => DistributionSpec {
                family: Family::Uniform,
                loc: self.loc - s,
                scale: s,
            },
            // loc - s * B(p) = (loc - s) + s * B(1 - p)
            Family::Bernoulli { p } => DistributionSpec {
                family: Family::Bernoulli { p: 1.0 - p },
                loc: self.loc - s,
                scale: s,
            },
            _ => self,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn loc(&self) -> f64 {
        self.loc
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_continuous(&self) -> bool {
        self.family.is_continuous()
    }

    /// Whether the law is symmetric about its mean, decided from the family
    /// rather than numerically.
    pub fn is_symmetric(&self) -> bool {
        match self.family {
            Family::Bernoulli { p } => p == 0.5,
            f => f.is_symmetric(),
        }
    }

    fn standardise(&self, x: f64) -> f64 {
        (x - self.loc) / self.scale
    }

    /// Essential infimum and supremum.
    pub fn support(&self) -> (f64, f64) {
        let (a, b) = self.family.support();
        let (lo, hi) = (self.loc + self.scale * a, self.loc + self.scale * b);
        if self.scale > 0.0 {
            (lo, hi)
        } else {
            (hi, lo)
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = self.standardise(x);
        if self.scale > 0.0 {
            self.family.cdf(z)
        } else {
            self.family.sf(z) + self.atom(z)
        }
    }

    /// `P(X < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        let z = self.standardise(x);
        if self.scale > 0.0 {
            self.family.cdf_left(z)
        } else {
            self.family.sf(z)
        }
    }

    /// `P(X > x)`.
    pub fn survival(&self, x: f64) -> f64 {
        let z = self.standardise(x);
        if self.scale > 0.0 {
            self.family.sf(z)
        } else {
            self.family.cdf_left(z)
        }
    }

    fn atom(&self, z: f64) -> f64 {
        self.family.cdf(z) - self.family.cdf_left(z)
    }

    /// Lebesgue density; NaN for the discrete family.
    pub fn pdf(&self, x: f64) -> f64 {
        self.family.pdf(self.standardise(x)) / self.scale.abs()
    }

    /// Generalised inverse `inf{x : F(x) >= p}`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        check_probability("p", p)?;
        if self.scale > 0.0 {
            Ok(self.loc + self.scale * self.family.quantile(p)?)
        } else {
            // only continuous families keep a negative scale
            Ok(self.loc + self.scale * self.family.quantile_upper(p)?)
        }
    }

    /// `F^{-1}(1 - q)`, accurate for tiny `q`.
    pub fn quantile_upper(&self, q: f64) -> Result<f64> {
        check_probability("q", q)?;
        if self.scale > 0.0 {
            Ok(self.loc + self.scale * self.family.quantile_upper(q)?)
        } else {
            Ok(self.loc + self.scale * self.family.quantile(q)?)
        }
    }

    pub fn mean(&self) -> f64 {
        self.loc + self.scale * self.family.mean()
    }

    /// Variance; errors for Student t with `df <= 2`.
    pub fn variance(&self) -> Result<f64> {
        Ok(self.scale * self.scale * self.family.variance()?)
    }

    /// Mean absolute deviation `E|X - EX| = 2 * E(X - EX)_+`.
    pub fn mad(&self) -> f64 {
        2.0 * self.stop_loss(self.mean())
    }

    /// Population moment skewness; errors for Student t with `df <= 3`.
    pub fn moment_skewness(&self) -> Result<f64> {
        Ok(self.scale.signum() * self.family.moment_skewness()?)
    }

    /// Stop-loss transform `pi(t) = E(X - t)_+`.
    pub fn stop_loss(&self, t: f64) -> f64 {
        let z = self.standardise(t);
        if self.scale > 0.0 {
            self.scale * self.family.upper_partial(z)
        } else {
            -self.scale * self.family.lower_partial(z)
        }
    }

    /// Lower partial moment `E(X - t)_- = t - EX + pi(t)`.
    pub fn lower_partial(&self, t: f64) -> f64 {
        let z = self.standardise(t);
        if self.scale > 0.0 {
            self.scale * self.family.lower_partial(z)
        } else {
            -self.scale * self.family.upper_partial(z)
        }
    }

    /// `pi(t)` by adaptive quadrature of the survival function.
    pub fn stop_loss_by_quadrature(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        if t >= hi {
            return Ok(0.0);
        }
        let tol = QuadTolerance::default();
        let median = self.quantile(0.5)?;
        if t >= median {
            integrate(|z| self.survival(z), t, hi, tol)
        } else {
            // pi(t) = (mu - t) + int_{-inf}^t F
            let below = integrate(|z| self.cdf(z), lo.max(f64::NEG_INFINITY), t.max(lo), tol)?;
            Ok(self.mean() - t + below)
        }
    }

    /// `E(X - t)_-` as `int_{-inf}^t F(z) dz`.
    pub fn lower_partial_by_quadrature(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        if t <= lo {
            return Ok(0.0);
        }
        let tol = QuadTolerance::default();
        let inside = integrate(|z| self.cdf(z), lo, t.min(hi), tol)?;
        Ok(inside + (t - hi).max(0.0))
    }

    /// `E|X - EX|` by quadrature.
    pub fn mad_by_quadrature(&self) -> Result<f64> {
        Ok(2.0 * self.stop_loss_by_quadrature(self.mean())?)
    }

    /// `E g(X)`, by adaptive quadrature against the density for continuous
    /// families (split at `breaks` inside the support) and by summation for
    /// the two-point law.
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G, breaks: &[f64]) -> Result<f64> {
        if let Family::Bernoulli { p } = self.family {
            let (a, b) = (self.loc, self.loc + self.scale);
            return Ok((1.0 - p) * g(a) + p * g(b));
        }
        let (lo, hi) = self.support();
        let mut cuts: Vec<f64> = breaks.iter().copied().filter(|x| *x > lo && *x < hi).collect();
        if lo.is_infinite() && hi.is_infinite() && cuts.is_empty() {
            cuts.push(self.mean());
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut edges = vec![lo];
        edges.extend(cuts);
        edges.push(hi);
        let tol = QuadTolerance {
            atol: 1e-12,
            rtol: 1e-12,
            max_intervals: 8000,
        };
        let mut total = 0.0;
        for w in edges.windows(2) {
            total += integrate(
                |x| {
                    let d = self.pdf(x);
                    if d == 0.0 || !d.is_finite() {
                        0.0
                    } else {
                        g(x) * d
                    }
                },
                w[0],
                w[1],
                tol,
            )?;
        }
        Ok(total)
    }

    /// Draws `n` values by inversion from the ChaCha8 stream keyed by
    /// `seed` (stream 0).
    pub fn sample(&self, n: usize, seed: u64) -> Result<Sample> {
        let mut stream = UniformStream::new(seed, 0);
        self.sample_from(n, &mut stream)
    }

    /// Draws `n` values by inversion from an existing stream.
    pub fn sample_from(&self, n: usize, stream: &mut UniformStream) -> Result<Sample> {
        if n == 0 {
            return Err(SkewError::domain("sample size must be at least 1"));
        }
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(self.quantile(stream.next_open01())?);
        }
        Sample::new(values)
    }

    /// Named parameters in the inline grammar's vocabulary.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        let mut out = Vec::new();
        let (loc, scale) = (self.loc, self.scale);
        let affine = |out: &mut Vec<(&'static str, f64)>, default_loc: bool, default_scale: bool| {
            if !default_loc {
                out.push(("loc", loc));
            }
            if !default_scale {
                out.push(("scale", scale));
            }
        };
        match self.family {
            Family::Normal => {
                out.push(("mean", loc));
                out.push(("var", scale * scale));
            }
            Family::Gamma { shape } => {
                out.push(("shape", shape));
                out.push(("scale", scale));
                if loc != 0.0 {
                    out.push(("loc", loc));
                }
            }
            Family::LogNormal { log_var } => {
                if scale > 0.0 {
                    out.push(("logmean", scale.ln()));
                    out.push(("logvar", log_var));
                    affine(&mut out, loc == 0.0, true);
                } else {
                    out.push(("logvar", log_var));
                    affine(&mut out, false, false);
                }
            }
            Family::StudentT { df } => {
                out.push(("df", df));
                affine(&mut out, loc == 0.0, scale == 1.0);
            }
            Family::Exponential => {
                if scale > 0.0 {
                    out.push(("rate", 1.0 / scale));
                    affine(&mut out, loc == 0.0, true);
                } else {
                    affine(&mut out, false, false);
                }
            }
            Family::Uniform => {
                out.push(("lo", loc));
                out.push(("hi", loc + scale));
            }
            Family::Bernoulli { p } => {
                out.push(("p", p));
                affine(&mut out, loc == 0.0, scale == 1.0);
            }
        }
        out
    }

    /// Builds a spec from a family name and named parameters; the inverse of
    /// [`DistributionSpec::params`].
    pub fn from_parts(family: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let mut keys = ParamBag::new(family, params);
        let spec = match family.to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => {
                let mean = keys.either("mean", "loc")?.unwrap_or(0.0);
                let sd = match (keys.take("var"), keys.take("sd"), keys.take("scale")) {
                    (Some(v), None, None) => v.sqrt(),
                    (None, Some(s), None) | (None, None, Some(s)) => s,
                    (None, None, None) => 1.0,
                    _ => return Err(keys.conflict("var/sd/scale")),
                };
                if !(sd > 0.0) {
                    return Err(SkewError::Spec(format!("normal spread must be positive, got {sd}")));
                }
                Self::new(Family::Normal, mean, sd)?
            }
            "gamma" => {
                let shape = keys.required("shape")?;
                let scale = keys.take("scale").unwrap_or(1.0);
                let loc = keys.take("loc").unwrap_or(0.0);
                Self::new(Family::Gamma { shape }, loc, scale)?
            }
            "lognormal" | "lnorm" => {
                let log_var = keys.required("logvar")?;
                let scale = match (keys.take("logmean"), keys.take("scale")) {
                    (Some(m), None) => m.exp(),
                    (None, Some(s)) => s,
                    (None, None) => 1.0,
                    _ => return Err(keys.conflict("logmean/scale")),
                };
                let loc = keys.take("loc").unwrap_or(0.0);
                Self::new(Family::LogNormal { log_var }, loc, scale)?
            }
            "student_t" | "t" | "studentt" => {
                let df = keys.required("df")?;
                let loc = keys.take("loc").unwrap_or(0.0);
                let scale = keys.take("scale").unwrap_or(1.0);
                Self::new(Family::StudentT { df }, loc, scale)?
            }
            "exponential" | "exp" => {
                let scale = match (keys.take("rate"), keys.take("scale")) {
                    (Some(r), None) => {
                        if !(r > 0.0) {
                            return Err(SkewError::Spec(format!("exponential rate must be positive, got {r}")));
                        }
                        1.0 / r
                    }
                    (None, Some(s)) => s,
                    (None, None) => 1.0,
                    _ => return Err(keys.conflict("rate/scale")),
                };
                let loc = keys.take("loc").unwrap_or(0.0);
                Self::new(Family::Exponential, loc, scale)?
            }
            "uniform" => {
                let lo = keys.take("lo").unwrap_or(0.0);
                let hi = keys.take("hi").unwrap_or(1.0);
                Self::uniform(lo, hi)?
            }
            "bernoulli" => {
                let p = keys.required("p")?;
                let loc = keys.take("loc").unwrap_or(0.0);
                let scale = keys.take("scale").unwrap_or(1.0);
                Self::new(Family::Bernoulli { p }, loc, scale)?
            }
            other => return Err(SkewError::Spec(format!("unknown family '{other}'"))),
        };
        keys.finish()?;
        Ok(spec)
    }
}

struct ParamBag<'a> {
    family: &'a str,
    left: BTreeMap<String, f64>,
}

impl<'a> ParamBag<'a> {
    fn new(family: &'a str, params: &BTreeMap<String, f64>) -> Self {
        ParamBag {
            family,
            left: params.clone(),
        }
    }

    fn take(&mut self, key: &str) -> Option<f64> {
        self.left.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<f64> {
        self.take(key)
            .ok_or_else(|| SkewError::Spec(format!("{} requires parameter '{key}'", self.family)))
    }

    fn either(&mut self, a: &str, b: &str) -> Result<Option<f64>> {
        match (self.take(a), self.take(b)) {
            (Some(_), Some(_)) => Err(self.conflict(&format!("{a}/{b}"))),
            (x, y) => Ok(x.or(y)),
        }
    }

    fn conflict(&self, keys: &str) -> SkewError {
        SkewError::Spec(format!("{}: conflicting parameters {keys}", self.family))
    }

    fn finish(self) -> Result<()> {
        match self.left.keys().next() {
            Some(k) => Err(SkewError::Spec(format!("{}: unknown parameter '{k}'", self.family))),
            None => Ok(()),
        }
    }
}

/// Inline grammar `family:key=value,key=value`, e.g. `gamma:shape=0.1,scale=1`.
impl FromStr for DistributionSpec {
    type Err = SkewError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (family, rest) = match s.split_once(':') {
            Some((f, r)) => (f.trim(), r.trim()),
            None => (s, ""),
        };
        let mut params = BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| SkewError::Spec(format!("expected key=value, got '{item}'")))?;
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| SkewError::Spec(format!("parameter '{}' is not a number: '{}'", k.trim(), v.trim())))?;
            if params.insert(k.trim().to_ascii_lowercase(), value).is_some() {
                return Err(SkewError::Spec(format!("parameter '{}' given twice", k.trim())));
            }
        }
        DistributionSpec::from_parts(family, &params)
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.family.name())?;
        for (i, (k, v)) in self.params().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}
