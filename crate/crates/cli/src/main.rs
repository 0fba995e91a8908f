//! `lostsales` — simulate, benchmark, and learn ordering policies for
//! periodic-review lost-sales inventory systems with uncertain supply.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use lostsales_cli::commands::{self, ExecCtx};
use lostsales_cli::config::load_config;

#[derive(Parser)]
#[command(
    name = "lostsales",
    version,
    about = "Lost-sales inventory simulation and order-quantity learning",
    long_about = "Simulate periodic-review lost-sales inventory systems with positive lead \
                  time and uncertain supply, evaluate constant-order policies, run the \
                  censored-feedback elimination learner, solve small instances by dynamic \
                  programming, and reproduce the regret experiments."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON config for this subcommand.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Overrides the config's seed (for experiments: reseeds the list).
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Output directory (created if missing). Defaults to ./out.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for replications. Defaults to the logical core count.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Prints progress to stderr.
    #[arg(long)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one policy and export the period trace.
    Simulate(CommonArgs),
    /// Grid-search the optimal constant order and export the grid.
    Benchmark(CommonArgs),
    /// Run the elimination learner against a coupled benchmark.
    Learn(CommonArgs),
    /// Solve the discretized dynamic program and compare constant orders.
    Dp(CommonArgs),
    /// Run a full replicated experiment and aggregate regret metrics.
    Experiment(CommonArgs),
    /// Parse and validate a config without running anything.
    ValidateConfig(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Simulate(a)
            | Command::Benchmark(a)
            | Command::Learn(a)
            | Command::Dp(a)
            | Command::Experiment(a)
            | Command::ValidateConfig(a) => a,
        }
    }

    fn expected_mode(&self) -> Option<&'static str> {
        match self {
            Command::Simulate(_) => Some("simulate"),
            Command::Benchmark(_) => Some("benchmark"),
            Command::Learn(_) => Some("learn"),
            Command::Dp(_) => Some("dp"),
            Command::Experiment(_) => Some("experiment"),
            Command::ValidateConfig(_) => None,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // Usage problems are config errors: exit 1 with the diagnostic.
            let _ = e.print();
            return ExitCode::from(1);
        }
    };

    // Phase 1: configuration. Any failure here exits 1.
    let args = cli.command.args();
    let config = match load_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(1);
        }
    };
    if let Some(expected) = cli.command.expected_mode() {
        if config.mode() != expected {
            eprintln!(
                "config error: {expected} was given a {:?} config",
                config.mode()
            );
            return ExitCode::from(1);
        }
    }
    if matches!(cli.command, Command::ValidateConfig(_)) {
        println!("ok: valid {} config", config.mode());
        return ExitCode::SUCCESS;
    }

    let ctx = ExecCtx {
        out_dir: args.out.clone().unwrap_or_else(|| PathBuf::from("out")),
        seed_override: args.seed,
        jobs: args.jobs.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        }),
        verbose: args.verbose,
    };

    // Phase 2: execution. Failures here are runtime faults, exit 2.
    match commands::execute(config, &ctx) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("runtime error: {e:#}");
            ExitCode::from(2)
        }
    }
}
