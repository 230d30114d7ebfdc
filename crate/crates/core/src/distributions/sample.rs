use std::io::BufRead;
use std::path::Path;

use crate::error::{check_probability, Result, SkewError};

/// A finite sample with its order statistics and prefix sums cached.
///
/// Prefix sums are taken over the sorted values centred at the sample mean,
/// which keeps the piecewise-linear expectile and stop-loss evaluations free
/// of large cancellations.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    sorted: Vec<f64>,
    // prefix[k] = sum_{i<k} (sorted[i] - mean), accumulated upwards
    prefix: Vec<f64>,
    // suffix[k] = sum_{i>=k} (sorted[i] - mean), accumulated downwards, so
    // the suffix sums of a reflected sample are exactly the negated prefix sums
    suffix: Vec<f64>,
    mean: f64,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(SkewError::domain("a sample needs at least one value"));
        }
        if let Some(bad) = values.iter().position(|x| !x.is_finite()) {
            return Err(SkewError::domain(format!(
                "sample value #{} is not finite ({})",
                bad + 1,
                values[bad]
            )));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let mut prefix = Vec::with_capacity(sorted.len() + 1);
        let mut acc = 0.0;
        prefix.push(acc);
        for x in &sorted {
            acc += x - mean;
            prefix.push(acc);
        }
        let mut suffix = vec![0.0; sorted.len() + 1];
        for i in (0..sorted.len()).rev() {
            suffix[i] = suffix[i + 1] + (sorted[i] - mean);
        }
        Ok(Sample {
            values,
            sorted,
            prefix,
            suffix,
            mean,
        })
    }

    /// Parses one real per line. Blank lines and lines starting with `#` are
    /// skipped; anything else that fails to parse is an error naming the
    /// 1-based line number.
    pub fn parse(text: &str) -> Result<Self> {
        Self::read(text.as_bytes())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut values = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let value: f64 = trimmed.parse().map_err(|_| SkewError::Parse {
                line: idx + 1,
                message: format!("not a real number: '{trimmed}'"),
            })?;
            if !value.is_finite() {
                return Err(SkewError::Parse {
                    line: idx + 1,
                    message: format!("value is not finite: '{trimmed}'"),
                });
            }
            values.push(value);
        }
        if values.is_empty() {
            return Err(SkewError::Parse {
                line: 0,
                message: "input contains no values".into(),
            });
        }
        Self::new(values)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| SkewError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::read(std::io::BufReader::new(file))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values in their original order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub(crate) fn centred_prefix(&self) -> &[f64] {
        &self.prefix
    }

    pub(crate) fn centred_suffix(&self) -> &[f64] {
        &self.suffix
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn is_degenerate(&self) -> bool {
        self.sorted[0] == self.sorted[self.sorted.len() - 1]
    }

    pub(crate) fn require_nondegenerate(&self) -> Result<()> {
        if self.is_degenerate() {
            Err(SkewError::degenerate(format!(
                "all {} observations equal {}",
                self.len(),
                self.sorted[0]
            )))
        } else {
            Ok(())
        }
    }

    /// The sample `c * x + d`.
    pub fn affine(&self, c: f64, d: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|x| c * x + d).collect())
    }

    /// `#{X_i <= x}`.
    pub fn count_le(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v <= x)
    }

    /// `#{X_i < x}`.
    pub fn count_lt(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v < x)
    }

    /// Right-continuous empirical cdf.
    pub fn cdf(&self, x: f64) -> f64 {
        self.count_le(x) as f64 / self.len() as f64
    }

    /// Generalised inverse `inf{x : F_n(x) >= p}`, i.e. the order statistic
    /// `x_(ceil(n p))`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        check_probability("p", p)?;
        let n = self.len();
        let nf = n as f64;
        let mut k = (nf * p).ceil() as usize;
        // guard against n * p rounding up past an exact integer
        if k > 1 && ((k - 1) as f64) / nf >= p {
            k -= 1;
        }
        Ok(self.sorted[k.clamp(1, n) - 1])
    }

    /// Empirical stop-loss transform `(1/n) sum (X_i - t)_+`.
    pub fn stop_loss(&self, t: f64) -> f64 {
        let n = self.len();
        let k = self.count_le(t);
        ((self.suffix[k] - (n - k) as f64 * (t - self.mean)) / n as f64).max(0.0)
    }

    /// Empirical `(1/n) sum (X_i - t)_-`.
    pub fn lower_partial(&self, t: f64) -> f64 {
        let n = self.len();
        let k = self.count_lt(t);
        ((k as f64 * (t - self.mean) - self.prefix[k]) / n as f64).max(0.0)
    }

    /// Mean absolute deviation about the sample mean.
    pub fn mad(&self) -> f64 {
        2.0 * self.stop_loss(self.mean)
    }

    /// Central moment with `1/n` normalisation.
    pub fn central_moment(&self, order: i32) -> f64 {
        let n = self.len() as f64;
        self.values.iter().map(|x| (x - self.mean).powi(order)).sum::<f64>() / n
    }
}
