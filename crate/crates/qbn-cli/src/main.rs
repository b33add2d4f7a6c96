//! `qbn` — scenario runner and verification suite for the quantum exclusion
//! semigroup library.
//!
//! Exit codes: 0 success, 1 failed verification checks, 2 config/schema
//! violation, 3 capacity limit.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qbn_cli::scenario::{load_config, run_scenario, write_outcome};
use qbn_cli::suite::{run_suite, write_suite, SuiteConfig, FAMILIES};
use qbn_cli::CliError;

#[derive(Parser)]
#[command(name = "qbn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a scenario config and export report.json + timeseries.csv.
    Run(RunArgs),
    /// Run identity/property checks and aggregate pass/fail into suite.json.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON path.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json and timeseries.csv.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Multiplies every tolerance.
    #[arg(long)]
    tolerance_scale: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Optional suite config JSON; defaults cover every family.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for suite.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Run a single check family.
    #[arg(long, value_parser = FAMILIES.to_vec())]
    only: Option<String>,
    /// Inject a known-bad commutator coefficient; the suite must fail.
    #[arg(long)]
    negative_control: bool,
    /// Multiplies every tolerance.
    #[arg(long)]
    tolerance_scale: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Verify(args) => verify(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(args: RunArgs) -> Result<ExitCode, CliError> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(scale) = args.tolerance_scale {
        config.tolerances.scale = Some(config.tolerances.scale.unwrap_or(1.0) * scale);
    }
    let outcome = run_scenario(&config)?;
    write_outcome(&outcome, &args.out)?;
    println!(
        "scenario ok: wrote {} and {}",
        args.out.join("report.json").display(),
        args.out.join("timeseries.csv").display()
    );
    if !outcome.all_checks_pass {
        eprintln!("warning: some scenario checks failed (see report.json)");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> Result<ExitCode, CliError> {
    let mut config = match &args.config {
        Some(path) => SuiteConfig::load(path)?,
        None => SuiteConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(only) = args.only {
        config.only = Some(only);
    }
    if args.negative_control {
        config.negative_control = true;
    }
    if let Some(scale) = args.tolerance_scale {
        config.tolerance_scale *= scale;
    }
    let result = run_suite(&config)?;
    write_suite(&result, &args.out)?;
    for (family, secs) in &result.timings {
        println!("{family:<12} {secs:8.3}s");
    }
    println!(
        "{} checks: {} passed, {} failed -> {}",
        result.total,
        result.passed,
        result.failed,
        args.out.join("suite.json").display()
    );
    if result.failed > 0 {
        for failure in result.failures() {
            eprintln!(
                "FAIL {} n={} params={} residual={} tolerance={}",
                failure.identity, failure.n, failure.params, failure.residual, failure.tolerance
            );
        }
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}
