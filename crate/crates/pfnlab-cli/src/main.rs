//! Command-line experiment runner: config-driven pretraining,
//! bias/variance studies, probes, PPD checks, and SVG plotting.

mod config;
mod csv;
mod manifest;
mod plot;
mod runner;

use clap::{Args, Parser, Subcommand};
use config::{ExperimentKind, ProbeKind};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pfnlab", version, about = "Prior-data fitted network laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Experiment config file (flat sectioned key = value format).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker pool size; 0 uses all logical cores.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit predictor parameters on simulated tasks and save them.
    Pretrain(RunArgs),
    /// Bias/variance decomposition over replicate datasets.
    BiasVariance(RunArgs),
    /// Statistical probes of a predictor.
    Probe {
        /// Probe kind: sensitivity, locality, tilt, or symmetry.
        kind: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Paired log-likelihood comparison of the exact PPD against
    /// perturbed challengers.
    PpdCheck(RunArgs),
    /// Render an SVG line chart from a CSV artifact.
    Plot {
        /// CSV file produced by another subcommand.
        csv: PathBuf,
        /// Column for the x axis.
        #[arg(long, default_value = "n")]
        x: String,
        /// Comma-separated y columns.
        #[arg(long)]
        y: String,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
        /// Use log-log axes.
        #[arg(long)]
        log_log: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Pretrain(args) => run(args, Some(ExperimentKind::Pretrain)),
        Command::BiasVariance(args) => run(args, Some(ExperimentKind::BiasVariance)),
        Command::PpdCheck(args) => run(args, Some(ExperimentKind::PpdCheck)),
        Command::Probe { kind, run: args } => match ProbeKind::parse(&kind) {
            Ok(k) => run(args, Some(ExperimentKind::Probe(k))),
            Err(e) => Err(format!("{e}")),
        },
        Command::Plot { csv, x, y, out, log_log } => {
            let y_cols: Vec<String> = y.split(',').map(|s| s.trim().to_string()).collect();
            plot::plot_csv(&csv, &x, &y_cols, &out, log_log)
                .map(|_| println!("wrote {}", out.display()))
                .map_err(|e| format!("{e}"))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: RunArgs, expected_kind: Option<ExperimentKind>) -> Result<(), String> {
    let bytes = std::fs::read(&args.config)
        .map_err(|e| format!("cannot read config {}: {e}", args.config.display()))?;
    let text = String::from_utf8_lossy(&bytes);
    let mut cfg = config::parse_experiment(&text).map_err(|e| format!("{e}"))?;
    if let Some(expected) = expected_kind {
        if cfg.kind != expected {
            return Err(format!(
                "config declares a different experiment kind than the subcommand (found {:?})",
                cfg.kind
            ));
        }
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.out_dir = out;
    }
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    let manifest = runner::run_experiment(&cfg, &bytes).map_err(|e| format!("{e}"))?;
    println!(
        "completed in {} ms; {} artifact(s) in {}",
        manifest.duration_ms,
        manifest.files.len(),
        cfg.out_dir.display()
    );
    for (name, hash) in &manifest.files {
        println!("  {name}  sha256:{hash}");
    }
    Ok(())
}
