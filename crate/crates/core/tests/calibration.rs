//! Monte Carlo checks of the plug-in variances and the simulation engine.

use rayon::prelude::*;

use expskew::inference::{
    sfunc_symmetry_band, sigma_alpha_sq, sigma_alpha_sq_hat, sigma_alpha_sq_hat_with, sigma_t_sq,
    sigma_t_sq_hat, SigmaAlphaForm,
};
use expskew::simulate::{run, true_value, ExperimentConfig, Measure, MeasureSpec};
use expskew::skewness::{expectile_skewness, skewness_function};
use expskew::{DistributionSpec, Sample, UniformStream};

fn draws(dist: &DistributionSpec, n: usize, reps: usize, seed: u64) -> Vec<Sample> {
    (0..reps)
        .into_par_iter()
        .map(|r| dist.sample_from(n, &mut UniformStream::new(seed, r as u64)).unwrap())
        .collect()
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0))
}

#[test]
fn sigma_alpha_matches_replication_variance() {
    let d = DistributionSpec::gamma(2.0, 1.0).unwrap();
    let (n, alpha) = (1000, 0.25);
    let samples = draws(&d, n, 2000, 71);
    let est: Vec<f64> = samples.par_iter().map(|s| expectile_skewness(s, alpha, true).unwrap()).collect();
    let (_, var) = mean_var(&est);
    let empirical = n as f64 * var;

    let plug: Vec<f64> = samples.par_iter().map(|s| sigma_alpha_sq_hat(s, alpha).unwrap()).collect();
    let (plug_mean, _) = mean_var(&plug);
    let population = sigma_alpha_sq(&d, alpha, SigmaAlphaForm::DeltaMethod).unwrap();
    let printed = sigma_alpha_sq(&d, alpha, SigmaAlphaForm::AsPrinted).unwrap();
    let printed_plug = sigma_alpha_sq_hat_with(&samples[0], alpha, SigmaAlphaForm::AsPrinted).unwrap();
    println!(
        "n var {empirical:.5}, plug-in mean {plug_mean:.5}, population {population:.5}, \
         printed form {printed:.5} (one sample {printed_plug:.5})"
    );
    assert!((plug_mean / empirical - 1.0).abs() < 0.10);
    assert!((population / empirical - 1.0).abs() < 0.10);
    assert!(printed < population);
}

#[test]
fn sigma_t_matches_replication_variance() {
    let d = DistributionSpec::exponential(1.0).unwrap();
    let (n, t) = (1000, 1.0);
    let samples = draws(&d, n, 2000, 72);
    let est: Vec<f64> = samples.par_iter().map(|s| skewness_function(s, t).unwrap()).collect();
    let (_, var) = mean_var(&est);
    let empirical = n as f64 * var;
    let plug: Vec<f64> = samples.par_iter().map(|s| sigma_t_sq_hat(s, t).unwrap()).collect();
    let (plug_mean, _) = mean_var(&plug);
    let population = sigma_t_sq(&d, t).unwrap();
    println!("n var {empirical:.5}, plug-in mean {plug_mean:.5}, population {population:.5}");
    assert!((plug_mean / empirical - 1.0).abs() < 0.10);
    assert!((population / empirical - 1.0).abs() < 0.10);
}

#[test]
fn band_rejects_symmetry_for_large_exponential_samples() {
    let d = DistributionSpec::exponential(1.0).unwrap();
    let samples = draws(&d, 5000, 200, 73);
    let inside = samples.par_iter().filter(|s| sfunc_symmetry_band(s, 1.0, 0.95).unwrap().inside).count();
    assert!(inside <= 2, "{inside} of 200 inside");
}

#[test]
fn expectile_skewness_is_consistent() {
    let d = DistributionSpec::gamma(2.0, 1.0).unwrap();
    let s = d.sample(100_000, 74).unwrap();
    for alpha in [0.1, 0.25, 0.4] {
        let target = true_value(&d, Measure::S2, Some(alpha)).unwrap();
        let est = expectile_skewness(&s, alpha, true).unwrap();
        assert!((est - target).abs() < 0.02, "alpha {alpha}: {est} vs {target}");
    }
}

#[test]
fn bias_shrinks_with_sample_size() {
    let start = std::time::Instant::now();
    let measures = vec![
        MeasureSpec::new(Measure::B2, Some(0.1)).unwrap(),
        MeasureSpec::new(Measure::S2, Some(0.1)).unwrap(),
        MeasureSpec::new(Measure::S2, Some(0.25)).unwrap(),
        MeasureSpec::new(Measure::S3, None).unwrap(),
    ];
    let laws = [
        DistributionSpec::gamma(0.5, 1.0).unwrap(),
        DistributionSpec::gamma(2.0, 1.0).unwrap(),
        DistributionSpec::lognormal(0.0, 1.0).unwrap(),
        DistributionSpec::exponential(1.0).unwrap(),
    ];
    for d in &laws {
        let cfg = ExperimentConfig::new(d, measures.clone(), vec![20, 10_000], 2000, 75);
        let table = run(&cfg).unwrap();
        assert!(table.valid);
        for m in &measures {
            let small = table.row(m.measure, m.alpha, 20).unwrap();
            let large = table.row(m.measure, m.alpha, 10_000).unwrap();
            assert!(
                large.sbias.abs() < small.sbias.abs(),
                "{d:?} {:?} {:?}: {} vs {}",
                m.measure,
                m.alpha,
                large.sbias,
                small.sbias
            );
        }
    }
    println!("bias decay study took {:.1}s", start.elapsed().as_secs_f64());
}

#[test]
fn simulation_ignores_thread_count() {
    let d = DistributionSpec::lognormal(0.0, 0.5).unwrap();
    let measures = vec![
        MeasureSpec::new(Measure::GammaM, None).unwrap(),
        MeasureSpec::new(Measure::S2, Some(0.2)).unwrap(),
    ];
    let cfg = ExperimentConfig::new(&d, measures, vec![30, 200], 300, 76);
    let with_threads = |k: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(k).build().unwrap();
        pool.install(|| run(&cfg).unwrap()).to_csv()
    };
    let single = with_threads(1);
    assert_eq!(single, with_threads(4));
    assert_eq!(single, run(&cfg).unwrap().to_csv());
}
