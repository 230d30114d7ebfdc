//! Expectile-based skewness measures, stop-loss skewness functions,
//! stochastic-order diagnostics and their asymptotic inference.
//!
//! Parametric laws are [`DistributionSpec`] values; samples are [`Sample`]
//! values. Both implement [`Law`], so every measure accepts either.

pub mod distributions;
pub mod error;
pub mod expectile;
pub mod format;
pub mod inference;
pub mod law;
pub mod order;
pub mod quadrature;
pub mod roots;
pub mod simulate;
pub mod skewness;
pub mod special;

pub use distributions::{DistributionSpec, Family, Sample, UniformStream};
pub use error::{Result, SkewError};
pub use law::Law;
pub use skewness::{SkewSource, SkewnessReport};
