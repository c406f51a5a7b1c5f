//! `modeshift` command-line front end.
//!
//! Exit codes: 0 success, 1 failed `verify-trace` check or internal error,
//! 2 usage or input error, 3 convergence diagnostic (an iteration cap was
//! hit, or deflation stalled).

mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "modeshift",
    version,
    about = "Mode-seeking clustering with the Epanechnikov kernel"
)]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "MODESHIFT_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a spherical Gaussian mixture.
    Gen(commands::gen::GenArgs),
    /// Select a KDE bandwidth by least-squares cross validation.
    Bandwidth(commands::bandwidth::BandwidthArgs),
    /// Cluster a dataset.
    Cluster(commands::cluster::ClusterArgs),
    /// Score labels against ground truth after optimal relabeling.
    Eval(commands::eval::EvalArgs),
    /// Run the mixture benchmark over several trials.
    Bench(commands::bench::BenchArgs),
    /// Re-check the decrease guarantees recorded in a trace.csv.
    VerifyTrace(commands::verify::VerifyArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::internal(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Gen(a) => commands::gen::run(a),
        Command::Bandwidth(a) => commands::bandwidth::run(a),
        Command::Cluster(a) => commands::cluster::run(a),
        Command::Eval(a) => commands::eval::run(a),
        Command::Bench(a) => commands::bench::run(a),
        Command::VerifyTrace(a) => commands::verify::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(CliError::USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
