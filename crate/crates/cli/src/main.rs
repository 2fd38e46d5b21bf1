//! Configuration-driven runner for Papangelou kernel experiments.
//!
//! Exit codes: 0 when every task passes, 1 when a task fails or errors
//! (the report is still written), 2 on usage or configuration errors.

mod config;
mod describe;
mod report;
mod runner;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{OutputFormat, RunConfig};

#[derive(Parser)]
#[command(
    name = "papangelou",
    version,
    about = "Papangelou kernels on finite spaces: checks, sampling, identity tests, extraction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task in the configuration.
    Run(RunArgs),
    /// Run only the `check` tasks.
    Check(RunArgs),
    /// Run only the `sample` tasks.
    Sample(RunArgs),
    /// Run only the `gnz` tasks.
    Gnz(RunArgs),
    /// Run only the `extract` tasks.
    Extract(RunArgs),
    /// Run only the `transform` tasks.
    Transform(RunArgs),
    /// Print a kernel's formula, constraints and postulate profile.
    Describe { kernel: String },
}

#[derive(Args)]
struct RunArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the configuration's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format: `json` or `csv` (csv adds sample and identity dumps).
    #[arg(long, value_parser = ["json", "csv"])]
    format: Option<String>,
    /// Override the probe mass used by checks and extraction.
    #[arg(long)]
    probe_mass: Option<u32>,
    /// Override the number of sampler replicas.
    #[arg(long)]
    replicas: Option<usize>,
}

fn load_config(args: &RunArgs) -> anyhow::Result<RunConfig> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", args.config.display()))?;
    let mut cfg = RunConfig::from_toml(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output.path = out.display().to_string();
    }
    if let Some(format) = &args.format {
        cfg.output.format = match format.as_str() {
            "csv" => OutputFormat::Csv,
            _ => OutputFormat::Json,
        };
    }
    if let Some(probe) = args.probe_mass {
        cfg.probe_mass = probe;
    }
    if let Some(replicas) = args.replicas {
        cfg.replicas = replicas;
    }
    Ok(cfg)
}

fn run(args: &RunArgs, filter: Option<&str>) -> ExitCode {
    let cfg = match load_config(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("configuration error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let out_dir = PathBuf::from(&cfg.output.path);
    match runner::execute(&cfg, filter, &out_dir) {
        Ok(report) => {
            println!(
                "{} task(s) run, {}; report written to {}",
                report.tasks.len(),
                if report.pass { "all passed" } else { "FAILURES" },
                out_dir.join("report.json").display()
            );
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("configuration error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => run(&args, None),
        Command::Check(args) => run(&args, Some("check")),
        Command::Sample(args) => run(&args, Some("sample")),
        Command::Gnz(args) => run(&args, Some("gnz")),
        Command::Extract(args) => run(&args, Some("extract")),
        Command::Transform(args) => run(&args, Some("transform")),
        Command::Describe { kernel } => match describe::describe(&kernel) {
            Ok(text) => {
                println!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(2)
            }
        },
    }
}
