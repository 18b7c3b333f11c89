// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: `fockdecay run <config>` and
//! `fockdecay validate <config>`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fockdecay::run::{run_scenario, RunError, RunOptions};
use fockdecay::scenario::{parse_config, ConfigError, Route, ScenarioConfig};

#[derive(Parser, Debug)]
#[command(name = "fockdecay", version, about = "Decay and flavour-oscillation scenarios in truncated Fock space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve a scenario and write CSV series plus a manifest.
    Run {
        config: PathBuf,
        /// Output directory, overriding `output_path` in the config.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Comma-separated routes overriding the config (kraus, ode, heisenberg).
        #[arg(long, value_delimiter = ',', value_parser = parse_route)]
        routes: Option<Vec<Route>>,
        /// Recorded in the manifest; all routes are deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and validate a scenario without running it.
    Validate { config: PathBuf },
}

fn parse_route(s: &str) -> Result<Route, String> {
    Route::parse(s).ok_or_else(|| format!("unknown route '{s}', expected kraus, ode or heisenberg"))
}

fn load(path: &PathBuf) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("CONFIG_UNREADABLE", path.display().to_string(), e.to_string()))?;
    parse_config(&text)
}

fn report(err: &RunError) -> ExitCode {
    match err {
        RunError::Config(e) => eprintln!("error[{}] at {}: {}", e.code, e.path, e.message),
        RunError::Invariant { name, detail } => eprintln!("error[INVARIANT] {name}: {detail}"),
        RunError::Io { path, detail } => eprintln!("error[IO] {path}: {detail}"),
    }
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Validate { config } => match load(&config) {
            Ok(_) => {
                println!("ok {}", config.display());
                ExitCode::SUCCESS
            }
            Err(e) => report(&RunError::Config(e)),
        },
        Command::Run {
            config,
            out_dir,
            routes,
            seed,
        } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(e) => return report(&RunError::Config(e)),
            };
            let opts = RunOptions { out_dir, routes, seed };
            match run_scenario(&cfg, &opts) {
                Ok(r) => {
                    println!(
                        "wrote {} files to {} (max cross-route deviation {:.3e})",
                        r.files.len(),
                        r.out_dir.display(),
                        r.max_cross_route_deviation
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => report(&e),
            }
        }
    }
}
