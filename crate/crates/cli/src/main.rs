//! Scenario runner for the detection-modeling library: reads a JSON config,
//! runs one named computation, and writes plot-ready CSV tables plus a JSON
//! summary. Outputs are deterministic byte-for-byte for a fixed config.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical/runtime error.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{ScenarioConfig, ScenarioKind};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(#[from] detopt_core::Error),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Runtime(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "detopt",
    about = "Detection budgets, differential efficiency profiles and detector-geometry optimization for free-space optical measurements",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a JSON config file.
    Run {
        /// Path to the scenario config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Override config values by dotted path, e.g. membrane.mode_m=8.
        /// May be repeated.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Output directory for the CSV/JSON files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// List the available scenario names.
    ListScenarios,
    /// Print the tool version.
    Version,
}

fn init_threads() {
    // DETOPT_THREADS caps internal parallelism; 0 or unset keeps the
    // default (one thread per core).
    if let Ok(raw) = std::env::var("DETOPT_THREADS") {
        match raw.trim().parse::<usize>() {
            Ok(0) => {}
            Ok(n) => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            Err(_) => {
                eprintln!("warning: ignoring non-numeric DETOPT_THREADS={raw:?}");
            }
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config, set, out } => {
            let text = std::fs::read_to_string(&config).map_err(|e| {
                CliError::Config(format!("cannot read {}: {e}", config.display()))
            })?;
            let cfg = ScenarioConfig::from_json(&text, &set)?;
            run::run(&cfg, &out)
        }
        Command::ListScenarios => {
            for kind in ScenarioKind::ALL {
                println!("{}", kind.slug());
            }
            Ok(())
        }
        Command::Version => {
            println!("detopt {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
