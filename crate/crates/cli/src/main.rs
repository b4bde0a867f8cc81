use std::path::PathBuf;
use std::process::ExitCode;

use blse::error::Error;
use blse::harness::{aggregate_dir, run_to_dir, ExperimentConfig};
use blse::problems::{problem_by_name, PROBLEM_NAMES};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "blse",
    version,
    about = "Active level-set estimation benchmarks with binary observations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's replication count.
        #[arg(long)]
        reps: Option<usize>,
        /// Replications run concurrently.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute aggregate tables from the traces in an experiment directory.
    Aggregate { dir: PathBuf },
    /// List the built-in problems.
    ListProblems,
    /// Run the numerical self-checks.
    Selftest,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Io(_) | Error::Serialization(_) => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(&e))
}

fn run(config: PathBuf, reps: Option<usize>, workers: usize, out: Option<PathBuf>) -> ExitCode {
    let config = match ExperimentConfig::load(&config) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let reps = reps.unwrap_or(config.replications);
    if reps == 0 {
        return fail(Error::Config("--reps must be positive".into()));
    }
    let Some(dir) = out.or_else(|| config.output_dir.clone()) else {
        return fail(Error::Config(
            "no output directory: set output_dir or pass --out".into(),
        ));
    };
    let summary = match run_to_dir(&config, reps, workers, &dir) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    for (r, msg) in &summary.failed {
        eprintln!("replication {r} failed: {msg}");
    }
    if let Some(last) = summary.aggregate.last() {
        println!(
            "{} on {}: {}/{} replications completed; iteration {} Brier {:.4} ± {:.4}",
            config.acquisition,
            config.problem,
            summary.completed.len(),
            reps,
            last.iteration,
            last.brier.mean,
            last.brier.two_sem
        );
    }
    println!("results written to {}", dir.display());
    if summary.all_failed() {
        ExitCode::from(EXIT_NUMERIC)
    } else if !summary.failed.is_empty() {
        ExitCode::from(EXIT_PARTIAL)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run {
            config,
            reps,
            workers,
            out,
        } => run(config, reps, workers, out),
        Command::Aggregate { dir } => match aggregate_dir(&dir) {
            Ok(rows) => {
                println!("aggregated {} iterations in {}", rows.len(), dir.display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::ListProblems => {
            for name in PROBLEM_NAMES {
                let p = problem_by_name(name).expect("built-in problem");
                let b = p.bounds();
                println!(
                    "{name}\tdim={}\ttheta={}\tbounds=[{}, {}]",
                    p.dim(),
                    p.theta(),
                    b.lower()[0],
                    b.upper()[0]
                );
            }
            ExitCode::SUCCESS
        }
        Command::Selftest => {
            let report = blse::oracle::selftest();
            for check in &report {
                println!(
                    "{} {}: {}",
                    if check.passed { "PASS" } else { "FAIL" },
                    check.name,
                    check.detail
                );
            }
            if report.iter().all(|c| c.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_NUMERIC)
            }
        }
    }
}
