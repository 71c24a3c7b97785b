use std::path::PathBuf;
use std::process::ExitCode;

use bwave::io_cli::{exit_code, run_text, Mode, RunOptions};
use bwave::Error;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bwave", version, about = "Ground states, d-curves, evolutions and region maps for the generalized Boussinesq equation")]
struct Cli {
    /// Force deterministic reductions (byte-identical CSVs across runs).
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a ground state; writes profile.bwf and summary.csv.
    Solve { config: PathBuf },
    /// Trace d(ζ) along a direction; writes dcurve.csv.
    Dcurve { config: PathBuf },
    /// Time-integrate; writes monitor.csv (and outcome.csv for experiments).
    Evolve { config: PathBuf },
    /// Tabulate the instability regions; writes regions_n<n>.csv.
    Regions { config: PathBuf },
}

fn threads() -> Result<usize, Error> {
    match std::env::var("BWAVE_THREADS") {
        Err(_) => Ok(1),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k),
            _ => Err(Error::RangeViolation { path: "BWAVE_THREADS".into(), msg: format!("{s:?} is not a positive integer") }),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, path) = match cli.command {
        Command::Solve { config } => (Mode::Solve, config),
        Command::Dcurve { config } => (Mode::DCurve, config),
        Command::Evolve { config } => (Mode::Evolve, config),
        Command::Regions { config } => (Mode::Regions, config),
    };
    let result = threads().and_then(|threads| {
        let text = std::fs::read_to_string(&path)?;
        run_text(mode, &text, RunOptions { deterministic: cli.deterministic, threads })
    });
    match result {
        Ok(report) => {
            for p in &report.written {
                println!("wrote {}", p.display());
            }
            for n in &report.notes {
                println!("{n}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ERROR {}: {}", e.code(), e);
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
