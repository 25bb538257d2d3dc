mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "swimmer", version, about = "Flagellated microswimmer simulator and suspension rheology")]
struct Cli {
    /// JSON configuration file; missing fields take built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads for sweeps (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Dot-path overrides into the config, e.g. `params.K_b=9e-23`.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one swimmer and write its trajectory.
    Simulate,
    /// Effective-viscosity curves (closed-form, numeric, or both).
    Viscosity {
        /// asymptotic | numeric | both
        #[arg(long, default_value = "asymptotic")]
        method: String,
    },
    /// Wall-entrapment stiffness scan and regime boundaries.
    Wall,
    /// Sign-change threshold table (closed-form and simulated columns).
    Thresholds,
    /// Free-swimmer oscillation classes over a stiffness scan.
    Oscillation,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match config::load(cli.config.as_deref(), &cli.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    }
    if let Err(e) = std::fs::create_dir_all(&cli.out) {
        eprintln!("config error: cannot create {}: {e}", cli.out.display());
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Simulate => commands::simulate::run(&cfg, &cli.out),
        Command::Viscosity { method } => commands::viscosity::run(&cfg, &cli.out, method),
        Command::Wall => commands::wall::run(&cfg, &cli.out),
        Command::Thresholds => commands::thresholds::run(&cfg, &cli.out),
        Command::Oscillation => commands::oscillation::run(&cfg, &cli.out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::CmdError::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(commands::CmdError::Numeric(e)) => {
            eprintln!("numerical failure: {e}");
            ExitCode::from(3)
        }
        Err(commands::CmdError::Io(e)) => {
            eprintln!("io error: {e}");
            ExitCode::from(3)
        }
    }
}
