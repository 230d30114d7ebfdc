//! One PASS/FAIL line per acceptance criterion. Runs as a plain binary so
//! the lines always reach the test output; exits nonzero if any fails.

use std::time::Instant;

use rayon::prelude::*;

use expskew::expectile::{empirical_expectile, expectile, omega_ratio};
use expskew::inference::{s2_confidence_interval, sfunc_confidence_interval};
use expskew::order::{convex_transform_order, mean_mad_order, Relation, DEFAULT_CONVEX_GRID, DEFAULT_GRID};
use expskew::simulate::{run, theory_curves, ExperimentConfig, Measure, MeasureSpec};
use expskew::skewness::{
    expectile_skewness, moment_skewness, scaled_skewness_function, skewness_function,
    skewness_function_by_integral, tajuddin_s3,
};
use expskew::{DistributionSpec, Sample, UniformStream};

type Outcome = Result<String, String>;

fn gamma(k: f64) -> DistributionSpec {
    DistributionSpec::gamma(k, 1.0).unwrap()
}

fn lognormal(v: f64) -> DistributionSpec {
    DistributionSpec::lognormal(0.0, v).unwrap()
}

fn continuous_library() -> Vec<DistributionSpec> {
    vec![
        DistributionSpec::normal(0.0, 1.0).unwrap(),
        DistributionSpec::normal(-3.0, 0.25).unwrap(),
        gamma(0.1),
        gamma(0.5),
        gamma(2.0),
        gamma(10.0),
        lognormal(0.01),
        lognormal(1.0),
        lognormal(2.25),
        DistributionSpec::student_t(3.0).unwrap(),
        DistributionSpec::student_t(5.0).unwrap(),
        DistributionSpec::exponential(1.0).unwrap(),
        DistributionSpec::exponential(4.0).unwrap(),
        DistributionSpec::uniform(-1.0, 2.0).unwrap(),
        gamma(3.0).reflect(),
        lognormal(0.5).affine(2.0, 1.0).unwrap(),
    ]
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

fn criterion1() -> Outcome {
    let cases = [
        ("gamma(0.1)", gamma(0.1), 6.325),
        ("gamma(10)", gamma(10.0), 0.632),
        ("lognormal(0,2.25)", lognormal(2.25), 33.468),
        ("lognormal(0,0.01)", lognormal(0.01), 0.302),
        ("t(5)", DistributionSpec::student_t(5.0).unwrap(), 0.0),
        ("normal(0,1)", DistributionSpec::normal(0.0, 1.0).unwrap(), 0.0),
    ];
    let mut worst: f64 = 0.0;
    for (name, d, want) in cases {
        let got = moment_skewness(&d).map_err(|e| format!("{name}: {e}"))?;
        let err = (got - want).abs();
        if err > 5e-3 {
            return Err(format!("{name}: {got} vs {want}"));
        }
        worst = worst.max(err);
    }
    Ok(format!("max abs error {worst:.2e} (tol 5e-3)"))
}

fn criterion2() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 1..=99 {
        let p = i as f64 / 100.0;
        let b = DistributionSpec::bernoulli(p).unwrap();
        for j in 1..=9 {
            let a = j as f64 * 0.05;
            let got = expectile_skewness(&b, a, false).map_err(|e| e.to_string())?;
            let want = (2.0 * a - 1.0) * (2.0 * p - 1.0);
            worst = worst.max((got - want).abs());
        }
    }
    if worst <= 1e-9 {
        Ok(format!("891 cells, max abs error {worst:.2e} (tol 1e-9)"))
    } else {
        Err(format!("max abs error {worst:.2e}"))
    }
}

fn criterion3() -> Outcome {
    let alphas = grid(0.05, 0.45, 0.05);
    let mut laws = continuous_library();
    for p in [0.01, 0.3, 0.5, 0.9] {
        laws.push(DistributionSpec::bernoulli(p).unwrap());
    }
    let mut closest = f64::INFINITY;
    for d in &laws {
        for &a in &alphas {
            let v = expectile_skewness(d, a, false).map_err(|e| format!("{d}: {e}"))?;
            let slack = (1.0 - 2.0 * a) - v.abs();
            if slack <= 0.0 {
                return Err(format!("{d} alpha {a}: |s2~| = {} reaches the bound", v.abs()));
            }
            closest = closest.min(slack);
        }
    }
    let b = DistributionSpec::bernoulli(1e-4).unwrap();
    let mut gap: f64 = 0.0;
    for &a in &alphas {
        let v = expectile_skewness(&b, a, false).map_err(|e| e.to_string())?;
        gap = gap.max((1.0 - 2.0 * a) - v);
    }
    if gap > 1e-3 {
        return Err(format!("bernoulli(1e-4) stays {gap:.2e} below the bound"));
    }
    Ok(format!(
        "{} laws strictly inside (min slack {closest:.2e}); bernoulli(1e-4) within {gap:.2e} of 1-2a",
        laws.len()
    ))
}

fn criterion4() -> Outcome {
    let alphas = grid(0.05, 0.95, 0.05);
    let mut worst: f64 = 0.0;
    for d in continuous_library() {
        for &a in &alphas {
            let e = expectile(&d, a).map_err(|x| format!("{d}: {x}"))?;
            let got = omega_ratio(&d, e).map_err(|x| format!("{d}: {x}"))?;
            let want = (1.0 - a) / a;
            worst = worst.max((got - want).abs() / want);
        }
    }
    if worst <= 1e-8 {
        Ok(format!("19 alphas x 16 laws, max rel error {worst:.2e} (tol 1e-8)"))
    } else {
        Err(format!("max rel error {worst:.2e}"))
    }
}

fn criterion5() -> Outcome {
    let laws = [
        DistributionSpec::exponential(1.0).unwrap(),
        DistributionSpec::exponential(0.3).unwrap(),
        gamma(0.5),
        gamma(4.0),
        DistributionSpec::normal(0.0, 1.0).unwrap(),
        DistributionSpec::normal(2.0, 9.0).unwrap(),
    ];
    let ts = grid(0.1, 5.0, 0.1);
    let mut worst: f64 = 0.0;
    for d in &laws {
        for &t in &ts {
            let a = skewness_function(d, t).map_err(|e| e.to_string())?;
            let b = skewness_function_by_integral(d, t).map_err(|e| e.to_string())?;
            worst = worst.max((a - b).abs());
        }
    }
    let e = DistributionSpec::exponential(1.0).unwrap();
    let closed = (-2.0_f64).exp();
    let err = (skewness_function(&e, 1.0).map_err(|x| x.to_string())? - closed).abs();
    if worst <= 1e-8 && err <= 1e-9 {
        Ok(format!("max gap {worst:.2e} (tol 1e-8); exponential S(1) error {err:.2e} (tol 1e-9)"))
    } else {
        Err(format!("max gap {worst:.2e}; S(1) error {err:.2e}"))
    }
}

fn criterion6() -> Outcome {
    let mut worst_limit: f64 = 0.0;
    let mut worst_slope: f64 = 0.0;
    for k in [0.5, 1.0, 2.0, 10.0] {
        let d = gamma(k);
        let s3 = tajuddin_s3(&d).map_err(|e| e.to_string())?;
        let near = expectile_skewness(&d, 0.4999, true).map_err(|e| e.to_string())?;
        worst_limit = worst_limit.max((near - s3).abs());
        let h = 1e-3;
        let up = expectile_skewness(&d, 0.49 + h, true).map_err(|e| e.to_string())?;
        let down = expectile_skewness(&d, 0.49 - h, true).map_err(|e| e.to_string())?;
        worst_slope = worst_slope.max(((up - down) / (2.0 * h)).abs());
    }
    if worst_limit <= 1e-3 && worst_slope <= 0.05 {
        Ok(format!("max |s2(0.4999)-s3| {worst_limit:.2e}; max |slope at 0.49| {worst_slope:.2e}"))
    } else {
        Err(format!("limit gap {worst_limit:.2e}, slope {worst_slope:.2e}"))
    }
}

fn random_sample(stream: &mut UniformStream) -> Sample {
    let n = 3 + (stream.next_open01() * 60.0) as usize;
    let law = match (stream.next_open01() * 4.0) as usize {
        0 => DistributionSpec::normal(stream.next_open01() * 10.0 - 5.0, 1.0 + 4.0 * stream.next_open01()).unwrap(),
        1 => DistributionSpec::gamma(0.2 + 3.0 * stream.next_open01(), 1.0).unwrap(),
        2 => DistributionSpec::lognormal(0.0, 2.0 * stream.next_open01()).unwrap(),
        _ => DistributionSpec::student_t(2.5 + 5.0 * stream.next_open01()).unwrap(),
    };
    loop {
        let s = law.sample_from(n, stream).unwrap();
        if !s.is_degenerate() {
            return s;
        }
    }
}

fn criterion7() -> Outcome {
    let mut stream = UniformStream::new(2024, 7);
    let mut failures = Vec::new();
    for case in 0..1000 {
        let s = random_sample(&mut stream);
        let a = 0.01 + 0.98 * stream.next_open01();
        let h = 20.0 * stream.next_open01() - 10.0;
        let lambda = 0.01 + 50.0 * stream.next_open01();
        let e = empirical_expectile(&s, a).unwrap();
        let scale = 1.0 + s.sorted().iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let tol = |mag: f64| 1e-10 * scale * mag.max(1.0);
        let mut fail = |what: &str| failures.push(format!("case {case} ({what})"));

        let shifted = s.affine(1.0, h).unwrap();
        if (empirical_expectile(&shifted, a).unwrap() - (e + h)).abs() > tol(1.0 + h.abs()) {
            fail("translation");
        }
        let scaled = s.affine(lambda, 0.0).unwrap();
        if (empirical_expectile(&scaled, a).unwrap() - lambda * e).abs() > tol(lambda) {
            fail("scaling");
        }
        let b = a + (1.0 - a) * stream.next_open01() * 0.5 + 1e-6;
        if b < 1.0 && empirical_expectile(&s, b).unwrap() <= e {
            fail("strict increase");
        }
        let nudged = empirical_expectile(&s, (a + 1e-9).min(0.999_999)).unwrap();
        if (nudged - e).abs() > 1e-6 * scale {
            fail("continuity");
        }
        let negated = s.affine(-1.0, 0.0).unwrap();
        if (empirical_expectile(&negated, 1.0 - a).unwrap() + e).abs() > tol(1.0) {
            fail("reflection");
        }
        let bumped: Vec<f64> = s
            .values()
            .iter()
            .map(|&x| x + stream.next_open01() * (stream.next_open01() < 0.5) as u8 as f64)
            .collect();
        let bumped = Sample::new(bumped).unwrap();
        if empirical_expectile(&bumped, a).unwrap() < e - tol(1.0) {
            fail("dominance");
        }
    }
    // the same identities on parametric laws
    let mut worst: f64 = 0.0;
    for d in continuous_library() {
        for &a in &[0.02, 0.3, 0.5, 0.77] {
            let e = expectile(&d, a).unwrap();
            let moved = d.affine(3.5, -2.0).unwrap();
            let r = d.reflect();
            worst = worst.max((expectile(&moved, a).unwrap() - (3.5 * e - 2.0)).abs() / (1.0 + 3.5 * e.abs()));
            worst = worst.max((expectile(&r, 1.0 - a).unwrap() + e).abs() / (1.0 + e.abs()));
        }
    }
    if worst > 1e-10 {
        failures.push(format!("family identities off by {worst:.2e}"));
    }
    if failures.is_empty() {
        Ok(format!("1000 sample cases x 6 properties, 0 failures; family identities within {worst:.2e}"))
    } else {
        Err(format!("{} failures, first: {}", failures.len(), failures[0]))
    }
}

/// Bisection on the mean identification score, independent of the
/// library's segment search.
fn bisection_expectile(xs: &[f64], a: f64) -> f64 {
    let score = |t: f64| -> f64 {
        xs.iter()
            .map(|&x| if x >= t { a * (x - t) } else { (1.0 - a) * (x - t) })
            .sum()
    };
    let (mut lo, mut hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if score(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion8() -> Outcome {
    let mut stream = UniformStream::new(99, 8);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let s = random_sample(&mut stream);
        let a = 0.001 + 0.998 * stream.next_open01();
        let got = empirical_expectile(&s, a).unwrap();
        let want = bisection_expectile(s.values(), a);
        let scale = 1.0 + s.sorted().iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        worst = worst.max((got - want).abs() / scale);
    }
    if worst <= 1e-12 {
        Ok(format!("1000 samples, max scaled error {worst:.2e} (tol 1e-12)"))
    } else {
        Err(format!("max scaled error {worst:.2e}"))
    }
}

fn coverage<F>(dist: &DistributionSpec, reps: usize, n: usize, seed: u64, covers: F) -> f64
where
    F: Fn(&Sample) -> bool + Sync,
{
    let hits: usize = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut stream = UniformStream::new(seed, r as u64);
            let s = dist.sample_from(n, &mut stream).unwrap();
            covers(&s) as usize
        })
        .sum();
    hits as f64 / reps as f64
}

fn criterion9() -> Outcome {
    let g = gamma(2.0);
    let truth = expectile_skewness(&g, 0.25, true).unwrap();
    let c_s2 = coverage(&g, 5000, 500, 9001, |s| {
        s2_confidence_interval(s, 0.25, 0.95).map(|ci| ci.contains(truth)).unwrap_or(false)
    });
    let e = DistributionSpec::exponential(1.0).unwrap();
    let target = (-2.0_f64).exp();
    let c_s = coverage(&e, 5000, 500, 9002, |s| {
        sfunc_confidence_interval(s, 1.0, 0.95).map(|ci| ci.contains(target)).unwrap_or(false)
    });
    let ok = |c: f64| (0.93..=0.97).contains(&c);
    let detail = format!("s2(0.25) gamma(2): {c_s2:.4}; S(1) exponential: {c_s:.4} (band [0.93, 0.97])");
    if ok(c_s2) && ok(c_s) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion10() -> Outcome {
    let measures = vec![
        MeasureSpec::new(Measure::GammaM, None).unwrap(),
        MeasureSpec::new(Measure::S2, Some(0.25)).unwrap(),
    ];
    let mut notes = Vec::new();
    for (name, d, by_variance) in [
        ("gamma(0.1)", gamma(0.1), false),
        ("lognormal(0,2.25)", lognormal(2.25), false),
        ("t(5)", DistributionSpec::student_t(5.0).unwrap(), true),
    ] {
        let cfg = ExperimentConfig::new(&d, measures.clone(), vec![100], 2000, 20_190_601);
        let table = run(&cfg).map_err(|e| e.to_string())?;
        let gm = table.row(Measure::GammaM, None, 100).unwrap();
        let s2 = table.row(Measure::S2, Some(0.25), 100).unwrap();
        let (label, a, b) = if by_variance {
            ("Var", gm.svar, s2.svar)
        } else {
            ("sMSE", gm.smse, s2.smse)
        };
        notes.push(format!("{name} {label} {a:.3e} > {b:.3e}"));
        if !(a > b) {
            return Err(notes.join("; "));
        }
    }
    Ok(notes.join("; "))
}

fn criterion11() -> Outcome {
    let alphas = grid(0.01, 0.49, 0.005);
    let ks: Vec<f64> = (0..=40).map(|i| 0.1 * 100f64.powf(i as f64 / 40.0)).collect();
    let rows = theory_curves("gamma", &ks, &alphas).map_err(|e| e.to_string())?;
    let m = alphas.len();
    let mut checks = 0;
    for (i, _) in ks.iter().enumerate() {
        for j in 1..m {
            let (prev, cur) = (&rows[i * m + j - 1], &rows[i * m + j]);
            checks += 1;
            if !(cur.s2_raw < prev.s2_raw && cur.b2 < prev.b2) {
                return Err(format!("not decreasing in alpha at k={} alpha={}", cur.param, cur.alpha));
            }
        }
    }
    for i in 1..ks.len() {
        for j in 0..m {
            let (prev, cur) = (&rows[(i - 1) * m + j], &rows[i * m + j]);
            checks += 1;
            if !(cur.s2_raw < prev.s2_raw && cur.b2 < prev.b2) {
                return Err(format!("not decreasing in k at k={} alpha={}", cur.param, cur.alpha));
            }
        }
    }
    Ok(format!("{} shapes x {} alphas, {checks} strict decreases", ks.len(), m))
}

fn criterion12() -> Outcome {
    let mut stream = UniformStream::new(12, 0);
    let ts = grid(0.1, 5.0, 0.1);
    let mut pairs = Vec::new();
    while pairs.len() < 20 {
        let a = 0.1 * 100f64.powf(stream.next_open01());
        let b = 0.1 * 100f64.powf(stream.next_open01());
        if (a / b).ln().abs() > 0.05 {
            // F has the larger shape, G is more skewed
            pairs.push((a.max(b), a.min(b)));
        }
    }
    let mut convex_holds = 0;
    for (kf, kg) in pairs {
        let (f, g) = (gamma(kf), gamma(kg));
        let convex = convex_transform_order(&f, &g, DEFAULT_CONVEX_GRID).map_err(|e| e.to_string())?;
        if convex.relation != Relation::Holds {
            continue;
        }
        convex_holds += 1;
        let mm = mean_mad_order(&f, &g, DEFAULT_GRID).map_err(|e| e.to_string())?;
        if mm.relation != Relation::Holds {
            return Err(format!("gamma({kf:.3}) vs gamma({kg:.3}): convex holds, mean/MAD {}", mm.render()));
        }
        for &t in &ts {
            let sf = scaled_skewness_function(&f, t).map_err(|e| e.to_string())?;
            let sg = scaled_skewness_function(&g, t).map_err(|e| e.to_string())?;
            if sf > sg + 1e-9 {
                return Err(format!("gamma({kf:.3}) vs gamma({kg:.3}): S~ not dominated at t={t}"));
            }
        }
    }
    if convex_holds == 0 {
        return Err("no pair satisfied the convex order, implication untested".into());
    }
    Ok(format!("20 pairs, convex holds for {convex_holds}, 0 violations down the chain"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("population moment skewness", criterion1),
        ("bernoulli expectile skewness", criterion2),
        ("bounds sharpness", criterion3),
        ("omega roundtrip", criterion4),
        ("skewness function dual forms", criterion5),
        ("limit and flattening of s2", criterion6),
        ("expectile property suite", criterion7),
        ("exact empirical expectile", criterion8),
        ("confidence interval coverage", criterion9),
        ("simulation orderings", criterion10),
        ("theory curve monotonicity", criterion11),
        ("order hierarchy", criterion12),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
