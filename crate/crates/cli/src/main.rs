use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fw_cli::run::{RunOptions, EXIT_CONFIG};

#[derive(Parser)]
#[command(
    name = "fwcheck",
    version,
    about = "Checks whether unitary maps of lattice Dirac Hamiltonians reach the FW representation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (one scenario or an array of them)
    Run {
        /// Scenario JSON file
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory for reports and tables
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override a tolerance, e.g. match_tol=1e-9
        #[arg(long = "tol-override", value_name = "KEY=VALUE", value_parser = parse_override)]
        tol_override: Vec<(String, f64)>,
        /// Write CSV tables next to the report
        #[arg(long)]
        tables: bool,
        /// Check every eigenstate instead of the low-energy sample
        #[arg(long)]
        full_spectrum: bool,
    },
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match cli.command {
        Command::Run {
            scenario,
            out,
            tol_override,
            tables,
            full_spectrum,
        } => {
            let opts = RunOptions {
                out_dir: out,
                tol_overrides: tol_override,
                tables,
                full_spectrum,
            };
            ExitCode::from(fw_cli::run(&scenario, &opts) as u8)
        }
    }
}
