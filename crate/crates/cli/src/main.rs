use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use expskew::inference::{curve_to_csv, s2_curve, sfunc_curve, SigmaAlphaForm};
use expskew::order::{
    convex_transform_order, expectile_order, mean_mad_order, OrderVerdict, DEFAULT_CONVEX_GRID, DEFAULT_GRID,
};
use expskew::simulate::{run, theory_curves, theory_to_csv, ExperimentConfig};
use expskew::{DistributionSpec, Sample, SkewError, SkewnessReport};

const SPEC_HELP: &str = "Distributions are written family:key=value,...  Families and keys: \
normal:mean,var|sd; gamma:shape,scale; lognormal:logvar,logmean; t:df; exponential:rate|scale; \
uniform:lo,hi; bernoulli:p. Every family also accepts loc and scale. Example: gamma:shape=0.1,scale=1";

/// Expectile-based skewness measures, confidence curves, order diagnostics
/// and simulation studies.
#[derive(Parser, Debug)]
#[command(name = "expskew", version, after_help = SPEC_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Every skewness measure for a sample file or a distribution.
    Measures {
        #[command(flatten)]
        input: Input,
        /// Lower level alpha in (0, 1/2); repeatable.
        #[arg(long)]
        alpha: Vec<f64>,
        /// Alpha grid lo:hi:step, added to any --alpha values.
        #[arg(long, value_parser = parse_grid)]
        alpha_grid: Option<Grid>,
        /// Grid of t > 0 for the skewness functions, lo:hi:step.
        #[arg(long, value_parser = parse_grid)]
        t_grid: Option<Grid>,
        #[command(flatten)]
        output: Output,
    },
    /// Empirical expectile skewness with confidence limits and symmetry band.
    CiCurve {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        alpha: Vec<f64>,
        /// Alpha grid lo:hi:step [default: 0.01:0.49:0.01].
        #[arg(long, value_parser = parse_grid)]
        alpha_grid: Option<Grid>,
        #[arg(long, default_value_t = 0.95, value_parser = parse_level)]
        level: f64,
        /// Asymptotic variance expression.
        #[arg(long, value_enum, default_value_t = SigmaForm::DeltaMethod)]
        sigma_form: SigmaForm,
        #[command(flatten)]
        output: Output,
    },
    /// Empirical skewness function with confidence limits and symmetry band.
    Sfunc {
        #[command(flatten)]
        input: Input,
        /// t grid lo:hi:step [default: 0.1:5:0.1].
        #[arg(long, value_parser = parse_grid)]
        t_grid: Option<Grid>,
        #[arg(long, default_value_t = 0.95, value_parser = parse_level)]
        level: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Skewness-order diagnostics of F against G on a grid.
    Order {
        #[arg(long = "f", value_parser = parse_spec)]
        f: DistributionSpec,
        #[arg(long = "g", value_parser = parse_spec)]
        g: DistributionSpec,
        #[arg(long, value_enum, default_value_t = OrderKind::All)]
        order: OrderKind,
        /// Grid length [default: 201 for the convex order, 2001 otherwise].
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Population b2 and s2 curves over a shape grid.
    Theory {
        /// gamma (shape), lognormal (log-variance), t (df) or bernoulli (p).
        #[arg(long)]
        family: String,
        /// Comma-separated shape values.
        #[arg(long, value_delimiter = ',', required = true)]
        params: Vec<f64>,
        /// Alpha grid lo:hi:step [default: 0.01:0.49:0.01].
        #[arg(long, value_parser = parse_grid)]
        alpha_grid: Option<Grid>,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo study described by a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed of the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Use the full published grid of sizes and replications.
        #[arg(long)]
        paper_grid: bool,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args, Debug)]
struct Input {
    /// File with one observation per line (# comments allowed).
    #[arg(long, required_unless_present = "dist", conflicts_with = "dist")]
    input: Option<PathBuf>,
    /// Distribution spec; with --n a seeded sample is drawn from it.
    #[arg(long, value_parser = parse_spec)]
    dist: Option<DistributionSpec>,
    /// Sample size to draw from --dist.
    #[arg(long, requires = "dist")]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; defaults to $EXPSKEW_OUT_DIR/<command>.<ext> when that
    /// variable is set, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SigmaForm {
    DeltaMethod,
    AsPrinted,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
enum OrderKind {
    Convex,
    MeanMad,
    Expectile,
    All,
}

#[derive(Clone, Debug)]
struct Grid(Vec<f64>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, step] = parts[..] else {
        return Err(format!("expected lo:hi:step, got '{s}'"));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("'{x}' is not a number"));
    let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(format!("grid '{s}' needs lo <= hi and step > 0"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(format!("grid '{s}' has too many points"));
    }
    Ok(Grid((0..count).map(|i| lo + step * i as f64).collect()))
}

fn parse_level(s: &str) -> Result<f64, String> {
    let level: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if level > 0.0 && level < 1.0 {
        Ok(level)
    } else {
        Err(format!("level {level} must lie in (0, 1)"))
    }
}

fn parse_spec(s: &str) -> Result<DistributionSpec, String> {
    s.parse::<DistributionSpec>().map_err(|e| e.to_string())
}

enum Source {
    Sample(Sample),
    Population(DistributionSpec),
}

impl Input {
    fn load(&self) -> Result<Source, SkewError> {
        match (&self.input, &self.dist, self.n) {
            (Some(path), _, _) => Sample::from_path(path)
                .map(Source::Sample)
                .map_err(|e| match e {
                    SkewError::Parse { line, message } => SkewError::Parse {
                        line,
                        message: format!("{}: {message}", path.display()),
                    },
                    other => other,
                }),
            (None, Some(d), Some(n)) => d.sample(n, self.seed).map(Source::Sample),
            (None, Some(d), None) => Ok(Source::Population(*d)),
            (None, None, _) => unreachable!("clap enforces one input source"),
        }
    }

    fn sample(&self) -> Result<Sample, SkewError> {
        match self.load()? {
            Source::Sample(s) => Ok(s),
            Source::Population(_) => Err(SkewError::Spec("this command needs data: pass --input, or --dist with --n".into())),
        }
    }
}

fn grid_or(grid: &Option<Grid>, extra: &[f64], default: Grid) -> Vec<f64> {
    let mut v: Vec<f64> = extra.to_vec();
    if let Some(Grid(g)) = grid {
        v.extend(g);
    }
    if v.is_empty() {
        v = default.0;
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn emit(output: &Output, command: &str, body: String) -> Result<(), SkewError> {
    let ext = match output.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let path = match (&output.out, std::env::var_os("EXPSKEW_OUT_DIR")) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => Some(PathBuf::from(dir).join(format!("{command}.{ext}"))),
        (None, None) => None,
    };
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&p, body).map_err(|e| SkewError::Io(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, SkewError> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn order_json(name: &str, v: &OrderVerdict) -> serde_json::Value {
    json!({
        "order": name,
        "relation": v.relation,
        "violations": v.violations,
        "witness": v.witness,
        "grid_size": v.grid.len(),
        "rendering": v.render(),
    })
}

fn execute(cli: Cli) -> Result<(), SkewError> {
    match cli.command {
        Command::Measures {
            input,
            alpha,
            alpha_grid,
            t_grid,
            output,
        } => {
            let alphas = grid_or(&alpha_grid, &alpha, Grid(vec![0.1, 0.25, 0.4]));
            let ts = grid_or(&t_grid, &[], Grid(vec![0.5, 1.0, 2.0]));
            let report = match input.load()? {
                Source::Sample(s) => SkewnessReport::compute(&s, &alphas, &ts)?,
                Source::Population(d) => SkewnessReport::compute(&d, &alphas, &ts)?,
            };
            let body = match output.format {
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json()? + "\n",
            };
            emit(&output, "measures", body)
        }
        Command::CiCurve {
            input,
            alpha,
            alpha_grid,
            level,
            sigma_form,
            output,
        } => {
            let sample = input.sample()?;
            let alphas = grid_or(&alpha_grid, &alpha, parse_grid("0.01:0.49:0.01").expect("default grid"));
            let form = match sigma_form {
                SigmaForm::DeltaMethod => SigmaAlphaForm::DeltaMethod,
                SigmaForm::AsPrinted => SigmaAlphaForm::AsPrinted,
            };
            let rows = s2_curve(&sample, &alphas, level, form)?;
            let body = match output.format {
                Format::Csv => curve_to_csv(&rows),
                Format::Json => to_json(&rows)?,
            };
            emit(&output, "ci-curve", body)
        }
        Command::Sfunc {
            input,
            t_grid,
            level,
            output,
        } => {
            let sample = input.sample()?;
            let ts = grid_or(&t_grid, &[], parse_grid("0.1:5:0.1").expect("default grid"));
            let rows = sfunc_curve(&sample, &ts, level)?;
            let body = match output.format {
                Format::Csv => curve_to_csv(&rows),
                Format::Json => to_json(&rows)?,
            };
            emit(&output, "sfunc", body)
        }
        Command::Order {
            f,
            g,
            order,
            grid,
            output,
        } => {
            let mut verdicts = Vec::new();
            if matches!(order, OrderKind::Convex | OrderKind::All) {
                let v = convex_transform_order(&f, &g, grid.unwrap_or(DEFAULT_CONVEX_GRID))?;
                verdicts.push(("convex_transform", v));
            }
            if matches!(order, OrderKind::MeanMad | OrderKind::All) {
                verdicts.push(("mean_mad", mean_mad_order(&f, &g, grid.unwrap_or(DEFAULT_GRID))?));
            }
            if matches!(order, OrderKind::Expectile | OrderKind::All) {
                verdicts.push(("expectile", expectile_order(&f, &g, grid.unwrap_or(DEFAULT_GRID))?));
            }
            let body = match output.format {
                Format::Csv => {
                    let mut out = String::from("order,relation,violations,grid_size,rendering\n");
                    for (name, v) in &verdicts {
                        out.push_str(&format!(
                            "{name},{},{},{},\"{}\"\n",
                            v.relation,
                            v.violations,
                            v.grid.len(),
                            v.render()
                        ));
                    }
                    out
                }
                Format::Json => {
                    let items: Vec<_> = verdicts.iter().map(|(n, v)| order_json(n, v)).collect();
                    to_json(&json!({ "f": f.to_string(), "g": g.to_string(), "verdicts": items }))?
                }
            };
            emit(&output, "order", body)
        }
        Command::Theory {
            family,
            params,
            alpha_grid,
            output,
        } => {
            let alphas = grid_or(&alpha_grid, &[], parse_grid("0.01:0.49:0.01").expect("default grid"));
            let rows = theory_curves(&family, &params, &alphas)?;
            let body = match output.format {
                Format::Csv => theory_to_csv(&rows),
                Format::Json => to_json(&rows)?,
            };
            emit(&output, "theory", body)
        }
        Command::Simulate {
            config,
            seed,
            paper_grid,
            output,
        } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| SkewError::Io(format!("{}: {e}", config.display())))?;
            let mut cfg = ExperimentConfig::from_json(&text)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.paper_grid |= paper_grid;
            let table = run(&cfg)?;
            if !table.valid {
                eprintln!("warning: more than 1% of replications failed in some cell");
            }
            for s in &table.skipped {
                eprintln!("warning: skipped {}: {}", s.measure.id(), s.reason);
            }
            let body = match output.format {
                Format::Csv => table.to_csv(),
                Format::Json => table.to_json()? + "\n",
            };
            emit(&output, "simulate", body)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                SkewError::Degenerate(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
