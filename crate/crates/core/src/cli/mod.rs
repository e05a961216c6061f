//! Batch runs driven by a TOML config: `fit`, `corr`, `cv`, `ic`,
//! `bootstrap`, `project` and `simulate`.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};

pub use commands::{execute, Command};
pub use config::{
    BootstrapSection, CorrSection, CvSection, DataSection, FitSection, IcSection, ProjectSection, RunConfig,
    ScanMode, ScenarioSpec, SimulateSection, Study,
};

#[derive(Debug, Parser)]
#[command(name = "clusterpanel", version, about = "Clustered inference, residual correlations and model selection for region-year panels")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

/// Parses the process arguments and runs the command.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let Some(config_path) = args.config.clone() else {
        Args::command()
            .error(clap::error::ErrorKind::MissingRequiredArgument, "--config <PATH> is required")
            .exit();
    };
    match run(&args, &config_path) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}: {e}", config_path.display());
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}

fn run(args: &Args, config_path: &std::path::Path) -> crate::Result<Vec<PathBuf>> {
    let mut cfg = RunConfig::load(config_path)?;
    if let Some(t) = args.threads.or(cfg.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| crate::Error::invalid(format!("thread pool: {e}")))?;
        cfg.threads = Some(t);
    }
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .ok_or_else(|| crate::Error::invalid("no output directory: pass --out or set `out` in the config"))?;
    execute(args.command, &cfg, seed, &out)
}
