use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cmass::direct_oracle::oracle_solve;
use cmass::harness::{
    build_expansion, emit_report, run_convergence, sweep_delta, Execution, ExpansionArtifact, ValidationOptions,
    ValidationReport,
};
use cmass::model::Config;
use cmass::outer_spectral::solve_three_point_eigen;
use cmass::{Error, Result};

#[derive(Parser)]
#[command(
    name = "cmass",
    version,
    about = "Global vibrations of a beam with a concentrated mass"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the asymptotic expansion and save it as JSON.
    Expand {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare an expansion with the direct solver along eps_l.
    Validate {
        #[arg(long)]
        artifact: PathBuf,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Solve the eps-problem once near a target eigenvalue.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        target: f64,
        #[arg(long, default_value_t = 1)]
        refine: usize,
    },
    /// Repeat the validation for several deformation parameters.
    SweepDelta {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated values, e.g. `0,0.5,1.0`.
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1.0")]
        deltas: Vec<f64>,
        #[command(flatten)]
        sweep: SweepArgs,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// Truncation order.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Index range `lo:hi`.
    #[arg(long = "l", default_value = "6:18", value_parser = parse_range)]
    l_range: (i64, i64),
    #[arg(long, default_value_t = 1)]
    refine: usize,
    #[arg(long)]
    sequential: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

impl SweepArgs {
    fn options(&self) -> ValidationOptions {
        ValidationOptions {
            n: self.n,
            l_range: self.l_range,
            refine: self.refine,
            execution: if self.sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            },
        }
    }
}

fn parse_range(s: &str) -> std::result::Result<(i64, i64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo = lo.trim().parse::<i64>().map_err(|e| e.to_string())?;
    let hi = hi.trim().parse::<i64>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

fn read_config(path: &PathBuf) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let cfg = Config::from_json(&text)?;
    cfg.split()?;
    Ok(cfg)
}

fn summarize(report: &ValidationReport) {
    let fits = &report.fits;
    let show = |name: &str, f: &Option<cmass::harness::fit::RateFit>| match f {
        Some(f) => println!(
            "  {name:<12} rate {:>7.3}  C {:>10.4e}  rows {}",
            f.rate, f.constant, f.rows
        ),
        None => println!("  {name:<12} (no fit)"),
    };
    println!(
        "delta = {}, n = {}: {} rows, {} failed",
        report.delta,
        report.n,
        report.rows.len(),
        report.failures.len()
    );
    show("eigenvalue", &fits.eigenvalue);
    show("outer_left", &fits.outer_left);
    show("outer_right", &fits.outer_right);
    show("inner", &fits.inner);
    show("gap", &fits.gap);
    show("amplitude", &fits.amplitude);
}

#[derive(Serialize)]
struct OracleSummary {
    epsilon: f64,
    target: f64,
    eigenvalue: f64,
    residual: f64,
    gap: f64,
    lower: Option<f64>,
    upper: Option<f64>,
    correlation: f64,
    inner_elements: usize,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Expand { config, out } => {
            let cfg = read_config(&config)?;
            let art = build_expansion(&cfg)?;
            std::fs::write(&out, art.to_json()?)?;
            println!("lambdas {:?}", art.lambdas);
            println!("wrote {}", out.display());
        }
        Command::Validate { artifact, sweep } => {
            let art = ExpansionArtifact::from_json(&std::fs::read_to_string(&artifact)?)?;
            let report = run_convergence(&art, &sweep.options())?;
            let stem = format!("validate_n{}", sweep.n);
            let (csv, json) = emit_report(&art, &report, &sweep.out_dir, &stem)?;
            summarize(&report);
            println!("wrote {} and {}", csv.display(), json.display());
        }
        Command::Oracle {
            config,
            eps,
            target,
            refine,
        } => {
            let cfg = read_config(&config)?;
            let (coeffs, spec) = cfg.split()?;
            let mode = solve_three_point_eigen(&coeffs, spec.mode_index, spec.outer_grid, 3, &spec.tolerances)?;
            let (problem, r) = oracle_solve(&coeffs, eps, target, &mode.term, &spec.tolerances, refine)?;
            let summary = OracleSummary {
                epsilon: eps,
                target,
                eigenvalue: r.eigenvalue,
                residual: r.residual,
                gap: r.gap,
                lower: r.lower,
                upper: r.upper,
                correlation: r.correlation,
                inner_elements: problem.inner_elements(),
            };
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::SweepDelta { config, deltas, sweep } => {
            let cfg = read_config(&config)?;
            let runs = sweep_delta(&cfg, &deltas, &sweep.options())?;
            for (art, report) in &runs {
                let stem = format!("delta_{}_n{}", art.config.delta, sweep.n);
                emit_report(art, report, &sweep.out_dir, &stem)?;
                println!("lambdas {:?}", art.lambdas);
                summarize(report);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
