//! Seeded Monte Carlo study of the plug-in skewness estimators, and the
//! population curves they estimate.
//!
//! Replication `r` reads stream `r` of the master seed; its samples for the
//! different sizes are prefixes of one draw, so a replication depends only on
//! `(seed, r)` and results never depend on thread scheduling.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{DistributionSpec, Sample, UniformStream};
use crate::error::{check_lower_alpha, Result, SkewError};
use crate::format::sig12;
use crate::skewness::{expectile_skewness, moment_skewness, quantile_skewness, tajuddin_s3};

pub const DEFAULT_SIZES: [usize; 3] = [20, 100, 1000];
pub const DEFAULT_REPLICATIONS: usize = 2000;
/// Sample sizes and replication count of the full published study.
pub const PAPER_SIZES: [usize; 9] = [20, 50, 100, 200, 500, 1000, 2000, 5000, 10000];
pub const PAPER_REPLICATIONS: usize = 10000;
/// Largest share of failed replications for which a run is still valid.
pub const MAX_FAILURE_RATE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    GammaM,
    B2,
    S2,
    S3,
}

impl Measure {
    pub fn id(self) -> &'static str {
        match self {
            Measure::GammaM => "gamma_m",
            Measure::B2 => "b2",
            Measure::S2 => "s2",
            Measure::S3 => "s3",
        }
    }

    fn takes_alpha(self) -> bool {
        matches!(self, Measure::B2 | Measure::S2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub measure: Measure,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl MeasureSpec {
    pub fn new(measure: Measure, alpha: Option<f64>) -> Result<Self> {
        let spec = MeasureSpec { measure, alpha };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        match (self.measure.takes_alpha(), self.alpha) {
            (true, Some(a)) => check_lower_alpha(a),
            (true, None) => Err(SkewError::Spec(format!("measure {} needs alpha", self.measure.id()))),
            (false, Some(_)) => Err(SkewError::Spec(format!("measure {} takes no alpha", self.measure.id()))),
            (false, None) => Ok(()),
        }
    }

    fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(f64::NAN)
    }

    fn estimate(&self, sample: &Sample) -> Result<f64> {
        match self.measure {
            Measure::GammaM => moment_skewness(sample),
            Measure::B2 => quantile_skewness(sample, self.alpha()),
            Measure::S2 => expectile_skewness(sample, self.alpha(), true),
            Measure::S3 => tajuddin_s3(sample),
        }
    }
}

/// Population value of a measure; exactly zero for symmetric laws.
pub fn true_value(dist: &DistributionSpec, measure: Measure, alpha: Option<f64>) -> Result<f64> {
    let spec = MeasureSpec::new(measure, alpha)?;
    if measure == Measure::GammaM {
        // existence of the third moment is checked even when the value is 0
        dist.moment_skewness()?;
    }
    if dist.is_symmetric() {
        return Ok(0.0);
    }
    match measure {
        Measure::GammaM => moment_skewness(dist),
        Measure::B2 => quantile_skewness(dist, spec.alpha()),
        Measure::S2 => expectile_skewness(dist, spec.alpha(), true),
        Measure::S3 => tajuddin_s3(dist),
    }
}

/// JSON schema of a study:
///
/// ```json
/// {"family": "gamma", "params": {"shape": 0.1, "scale": 1},
///  "measures": [{"measure": "gamma_m"}, {"measure": "s2", "alpha": 0.25}],
///  "ns": [20, 100, 1000], "reps": 2000, "seed": 1, "paper_grid": false}
/// ```
///
/// `ns` and `reps` default to the desk-scale study; `paper_grid` replaces
/// both by the published grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub measures: Vec<MeasureSpec>,
    #[serde(default = "default_sizes")]
    pub ns: Vec<usize>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub paper_grid: bool,
}

fn default_sizes() -> Vec<usize> {
    DEFAULT_SIZES.to_vec()
}

fn default_reps() -> usize {
    DEFAULT_REPLICATIONS
}

impl ExperimentConfig {
    pub fn new(dist: &DistributionSpec, measures: Vec<MeasureSpec>, ns: Vec<usize>, reps: usize, seed: u64) -> Self {
        ExperimentConfig {
            family: dist.family().name().to_string(),
            params: dist.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            measures,
            ns,
            reps,
            seed,
            paper_grid: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn distribution(&self) -> Result<DistributionSpec> {
        DistributionSpec::from_parts(&self.family, &self.params)
    }

    pub fn sizes(&self) -> Vec<usize> {
        if self.paper_grid {
            PAPER_SIZES.to_vec()
        } else {
            self.ns.clone()
        }
    }

    pub fn replications(&self) -> usize {
        if self.paper_grid {
            PAPER_REPLICATIONS
        } else {
            self.reps
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.distribution()?;
        if self.measures.is_empty() {
            return Err(SkewError::Spec("no measures requested".into()));
        }
        for m in &self.measures {
            m.validate()?;
        }
        if self.replications() < 1 {
            return Err(SkewError::Spec("replications must be at least 1".into()));
        }
        let sizes = self.sizes();
        if sizes.is_empty() || sizes.iter().any(|&n| n < 2) {
            return Err(SkewError::Spec("sample sizes must be nonempty and at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub measure: Measure,
    pub alpha: Option<f64>,
    pub n: usize,
    pub true_value: f64,
    /// Whether errors were divided by the true value (it is nonzero).
    pub standardized: bool,
    pub sbias: f64,
    pub svar: f64,
    pub smse: f64,
    pub var_share: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedMeasure {
    pub measure: Measure,
    pub alpha: Option<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentTable {
    pub distribution: String,
    pub replications: usize,
    pub seed: u64,
    pub rows: Vec<ExperimentRow>,
    pub skipped: Vec<SkippedMeasure>,
    /// False when some cell lost more than 1% of its replications.
    pub valid: bool,
}

impl ExperimentTable {
    pub fn row(&self, measure: Measure, alpha: Option<f64>, n: usize) -> Option<&ExperimentRow> {
        self.rows
            .iter()
            .find(|r| r.measure == measure && r.alpha == alpha && r.n == n)
    }

    /// Columns `measure,alpha,n,sbias,svar,smse,var_share,failures`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("measure,alpha,n,sbias,svar,smse,var_share,failures\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.measure.id(),
                r.alpha.map(sig12).unwrap_or_default(),
                r.n,
                sig12(r.sbias),
                sig12(r.svar),
                sig12(r.smse),
                sig12(r.var_share),
                r.failures
            ));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Runs the study: for every replication, one draw of the largest size whose
/// prefixes serve as the smaller samples.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentTable> {
    config.validate()?;
    let dist = config.distribution()?;
    let sizes = config.sizes();
    let reps = config.replications();
    let n_max = *sizes.iter().max().expect("validated nonempty");

    let mut targets = Vec::new();
    let mut skipped = Vec::new();
    for m in &config.measures {
        match true_value(&dist, m.measure, m.alpha) {
            Ok(v) => targets.push((*m, v)),
            Err(e) => skipped.push(SkippedMeasure {
                measure: m.measure,
                alpha: m.alpha,
                reason: e.to_string(),
            }),
        }
    }

    // estimates[r][size][measure]
    let estimates: Vec<Vec<Vec<Option<f64>>>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut stream = UniformStream::new(config.seed, r as u64);
            let draw = dist.sample_from(n_max, &mut stream)?;
            sizes
                .iter()
                .map(|&n| {
                    let sample = Sample::new(draw.values()[..n].to_vec())?;
                    Ok(targets
                        .iter()
                        .map(|(m, _)| m.estimate(&sample).ok().filter(|v| v.is_finite()))
                        .collect())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut valid = true;
    for (k, (m, truth)) in targets.iter().enumerate() {
        for (j, &n) in sizes.iter().enumerate() {
            let values: Vec<f64> = estimates.iter().filter_map(|rep| rep[j][k]).collect();
            let failures = reps - values.len();
            if failures as f64 > MAX_FAILURE_RATE * reps as f64 {
                valid = false;
            }
            rows.push(summarise(*m, n, *truth, &values, failures));
        }
    }
    Ok(ExperimentTable {
        distribution: dist.to_string(),
        replications: reps,
        seed: config.seed,
        rows,
        skipped,
        valid,
    })
}

fn summarise(m: MeasureSpec, n: usize, truth: f64, values: &[f64], failures: usize) -> ExperimentRow {
    let standardized = truth != 0.0;
    let errs: Vec<f64> = values
        .iter()
        .map(|&v| if standardized { (v - truth) / truth } else { v - truth })
        .collect();
    let count = errs.len() as f64;
    let sbias = errs.iter().sum::<f64>() / count;
    let svar = errs.iter().map(|e| (e - sbias) * (e - sbias)).sum::<f64>() / count;
    let smse = errs.iter().map(|e| e * e).sum::<f64>() / count;
    let var_share = if smse > 0.0 { (svar / smse).min(1.0) } else { 0.0 };
    ExperimentRow {
        measure: m.measure,
        alpha: m.alpha,
        n,
        true_value: truth,
        standardized,
        sbias,
        svar,
        smse,
        var_share,
        failures,
    }
}

/// Population curves `b2`, raw and normalised `s2` over a shape grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryRow {
    pub param: f64,
    pub alpha: f64,
    pub b2: f64,
    pub s2_raw: f64,
    pub s2: f64,
}

/// The law of `family` indexed by its shape parameter: gamma shape (scale
/// 1), lognormal log-variance (log-mean 0), t degrees of freedom, bernoulli
/// success probability.
pub fn shape_family(family: &str, param: f64) -> Result<DistributionSpec> {
    match family.to_ascii_lowercase().as_str() {
        "gamma" => DistributionSpec::gamma(param, 1.0),
        "lognormal" | "lnorm" => DistributionSpec::lognormal(0.0, param),
        "t" | "student_t" | "studentt" => DistributionSpec::student_t(param),
        "bernoulli" => DistributionSpec::bernoulli(param),
        other => Err(SkewError::Spec(format!(
            "theory curves need a shape family (gamma, lognormal, t, bernoulli), got '{other}'"
        ))),
    }
}

pub fn theory_curves(family: &str, params: &[f64], alphas: &[f64]) -> Result<Vec<TheoryRow>> {
    if params.is_empty() || alphas.is_empty() {
        return Err(SkewError::domain("theory curves need nonempty grids"));
    }
    for &a in alphas {
        check_lower_alpha(a)?;
    }
    let cells: Vec<(f64, f64)> = params
        .iter()
        .flat_map(|&p| alphas.iter().map(move |&a| (p, a)))
        .collect();
    cells
        .par_iter()
        .map(|&(param, alpha)| {
            let d = shape_family(family, param)?;
            Ok(TheoryRow {
                param,
                alpha,
                b2: quantile_skewness(&d, alpha)?,
                s2_raw: expectile_skewness(&d, alpha, false)?,
                s2: expectile_skewness(&d, alpha, true)?,
            })
        })
        .collect()
}

pub fn theory_to_csv(rows: &[TheoryRow]) -> String {
    let mut out = String::from("param,alpha,b2,s2_raw,s2\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            sig12(r.param),
            sig12(r.alpha),
            sig12(r.b2),
            sig12(r.s2_raw),
            sig12(r.s2)
        ));
    }
    out
}
