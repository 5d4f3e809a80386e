//! Command-line harness: `dpinn <experiment> --config <file> [--out <dir>]
//! [--seed <n>] [--parallel <k>]`.
//!
//! Exit codes: 0 on success, 1 for configuration errors, 2 for runtime
//! failures. `DPINN_THREADS` caps worker parallelism regardless of the
//! `--parallel` flag.

use clap::{Parser, Subcommand};
use dpinn::cli::{self, ExperimentKind};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "dpinn",
    about = "Physics-informed networks with Laplace-Beltrami positional encodings",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON experiment configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Setup seed (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
    /// Parallel worker threads for independent sweep cells
    #[arg(long, default_value_t = 1)]
    parallel: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Inverse Eikonal problem on a helical tube, three model arms
    CoilEikonal(RunArgs),
    /// Steady heat conduction in a finned sink from boundary data only
    Heatsink(RunArgs),
    /// Manufactured Poisson benchmark over eigenfunction count and mesh size
    PoissonSweep(RunArgs),
    /// Pairwise geodesic-distance operator network with path tracing
    BunnyDeeponet(RunArgs),
    /// Matern-GP versus encoding-network regression study
    RegressionStudy(RunArgs),
    /// Eigenbasis computation and export only
    EigenOnly(RunArgs),
    /// Parse, schema-check, and echo a config file
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load_config(kind: ExperimentKind, args: &RunArgs) -> Result<cli::ExperimentConfig, String> {
    let mut cfg = match &args.config {
        Some(path) => cli::validate_config(path).map_err(|e| e.to_string())?,
        None => cli::default_config(
            kind,
            args.out
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("out/{}", kind.name()))),
        ),
    };
    if cfg.experiment != kind {
        return Err(format!(
            "config is for experiment `{}`, but the `{}` subcommand was invoked",
            cfg.experiment.name(),
            kind.name()
        ));
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run(kind: ExperimentKind, args: &RunArgs) -> ExitCode {
    let cfg = match load_config(kind, args) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("configuration error: {msg}");
            return ExitCode::from(1);
        }
    };
    match cli::run_experiment(&cfg, args.parallel.max(1)) {
        Ok(summary) => {
            println!("{}: {}", kind.name(), summary);
            println!("artifacts in {}", cfg.output_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("runtime error: {e}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::CoilEikonal(a) => run(ExperimentKind::CoilEikonal, a),
        Command::Heatsink(a) => run(ExperimentKind::Heatsink, a),
        Command::PoissonSweep(a) => run(ExperimentKind::PoissonSweep, a),
        Command::BunnyDeeponet(a) => run(ExperimentKind::BunnyDeeponet, a),
        Command::RegressionStudy(a) => run(ExperimentKind::RegressionStudy, a),
        Command::EigenOnly(a) => run(ExperimentKind::EigenOnly, a),
        Command::Validate { config } => match cli::validate_config(config) {
            Ok(cfg) => {
                println!("{}", serde_json::to_string_pretty(&cfg).unwrap());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("configuration error: {e}");
                ExitCode::from(1)
            }
        },
    }
}
