//! `inflection`: batch front-end for the boundary-inflection laboratory.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "inflection",
    version,
    about = "Propagate whispering-gallery modes through a boundary inflection and analyse the searchlight beam",
    after_help = RunConfig::help(),
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// `key = value` configuration file; defaults apply when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir`.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads for parallel mode runs.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one mode; write fields, flux, G0 and diagnostics.
    Run,
    /// Gram matrix of the searchlight amplitudes of `modes`.
    Scatter,
    /// Compare the configured resolution with one twice as coarse.
    Convergence,
    /// Check Airy, mode and free-propagation oracles.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot configure {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let mut cfg = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
        },
        None => {
            let mut c = RunConfig::default();
            c.resolve().expect("defaults are valid");
            c
        }
    };
    if let Some(dir) = cli.output {
        cfg.output_dir = dir;
    }
    let code = match cli.command {
        Command::Run => commands::cmd_run(&cfg),
        Command::Scatter => commands::cmd_scatter(&cfg),
        Command::Convergence => commands::cmd_convergence(&cfg),
        Command::Selftest => commands::cmd_selftest(),
    };
    ExitCode::from(code)
}
