//! `lpweak`: run verification scenarios from a TOML configuration.
//!
//! Exit status: 0 when every check passes, 1 on a verification failure,
//! 2 on an invalid configuration, 3 on an I/O failure.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::ConfigError;

#[derive(Debug, Parser)]
#[command(name = "lpweak", version, about = "Run lpweak verification scenarios")]
struct Cli {
    /// TOML configuration; defaults apply to everything it leaves out.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (falls back to `[run] out`, then LPWEAK_OUT).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Scenarios run concurrently on this many threads.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Print the scenario names and exit.
    #[arg(long)]
    list_scenarios: bool,
    /// Seed for every seeded family, overriding the configuration.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_scenarios {
        for name in lpweak::verify::SCENARIOS {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    let text = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(3);
            }
        },
        None => String::new(),
    };
    let mut cfg = match config::RunConfig::parse(&text) {
        Ok(c) => c,
        Err(ConfigError(msg)) => {
            eprintln!("error: invalid configuration: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: invalid configuration: --workers must be positive");
            return ExitCode::from(2);
        }
        cfg.workers = Some(w);
    }
    let out = cli
        .out
        .or_else(|| cfg.out.clone())
        .or_else(|| std::env::var_os("LPWEAK_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("lpweak-out"));
    match run::execute(&cfg, &out) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(run::RunError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(run::RunError::Config(msg)) => {
            eprintln!("error: invalid configuration: {msg}");
            ExitCode::from(2)
        }
    }
}
