//! `opcalc <command> <config.json> [--output-dir D] [--seed N] [--threads K]`
//!
//! Exit status: 0 success, 1 invalid config, 2 region violation,
//! 3 numerical failure.

mod config;
mod error;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::Command;
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "opcalc", version, about = "Operator-calculus solver and estimate verifier")]
struct Cli {
    /// solve, scan, compare, evolve or probe
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration
    config: PathBuf,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "OPCALC_THREADS")]
    threads: Option<usize>,
}

fn execute(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = config::load(&cli.config)?;
    if let Some(dir) = cli.output_dir {
        cfg.output_dir = Some(dir);
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    let threads = cfg.threads.unwrap_or(1);
    let base = cli
        .config
        .parent()
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."));
    run::run(cli.command, &cfg, &base, threads)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("opcalc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
