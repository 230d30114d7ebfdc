use crate::distributions::{DistributionSpec, Sample};
use crate::error::Result;
use crate::expectile;

/// The primitives every location/skewness functional is built from. It is
/// implemented by parametric laws and by samples (through their empirical
/// distribution), so each measure is written once.
pub trait Law {
    fn mean(&self) -> f64;
    /// Right-continuous cdf.
    fn cdf(&self, x: f64) -> f64;
    fn quantile(&self, p: f64) -> Result<f64>;
    /// `E(X - t)_+`.
    fn stop_loss(&self, t: f64) -> f64;
    /// `E(X - t)_-`.
    fn lower_partial(&self, t: f64) -> f64;
    fn mad(&self) -> f64;
    fn expectile(&self, alpha: f64) -> Result<f64>;
    /// Errors if the law is a point mass.
    fn ensure_nondegenerate(&self) -> Result<()>;
    /// Short label for reports.
    fn describe(&self) -> String;
}

impl Law for DistributionSpec {
    fn mean(&self) -> f64 {
        DistributionSpec::mean(self)
    }
    fn cdf(&self, x: f64) -> f64 {
        DistributionSpec::cdf(self, x)
    }
    fn quantile(&self, p: f64) -> Result<f64> {
        DistributionSpec::quantile(self, p)
    }
    fn stop_loss(&self, t: f64) -> f64 {
        DistributionSpec::stop_loss(self, t)
    }
    fn lower_partial(&self, t: f64) -> f64 {
        DistributionSpec::lower_partial(self, t)
    }
    fn mad(&self) -> f64 {
        DistributionSpec::mad(self)
    }
    fn expectile(&self, alpha: f64) -> Result<f64> {
        expectile::expectile(self, alpha)
    }
    fn ensure_nondegenerate(&self) -> Result<()> {
        // constructible specs are never point masses
        Ok(())
    }
    fn describe(&self) -> String {
        self.to_string()
    }
}

impl Law for Sample {
    fn mean(&self) -> f64 {
        Sample::mean(self)
    }
    fn cdf(&self, x: f64) -> f64 {
        Sample::cdf(self, x)
    }
    fn quantile(&self, p: f64) -> Result<f64> {
        Sample::quantile(self, p)
    }
    fn stop_loss(&self, t: f64) -> f64 {
        Sample::stop_loss(self, t)
    }
    fn lower_partial(&self, t: f64) -> f64 {
        Sample::lower_partial(self, t)
    }
    fn mad(&self) -> f64 {
        Sample::mad(self)
    }
    fn expectile(&self, alpha: f64) -> Result<f64> {
        expectile::empirical_expectile(self, alpha)
    }
    fn ensure_nondegenerate(&self) -> Result<()> {
        self.require_nondegenerate()
    }
    fn describe(&self) -> String {
        format!("sample(n={})", self.len())
    }
}
