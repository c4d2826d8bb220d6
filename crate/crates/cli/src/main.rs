use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use equimap::projection::DEFAULT_GATE_DELTA;
use equimap::GridSpec;
use equimap_cli::commands::{self, SEED_ENV};
use equimap_cli::{CliResult, Failure};
use serde::Serialize;

/// Numerical laboratory for equivariant Schrödinger maps near harmonic maps.
///
/// Exit codes: 0 success, 1 failed check, 2 usage or input error,
/// 3 outside the projection regime, 4 numerical abort.
#[derive(Parser)]
#[command(name = "equimap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = -12.0, allow_hyphen_values = true)]
    y_min: f64,
    #[arg(long, default_value_t = 12.0, allow_hyphen_values = true)]
    y_max: f64,
    #[arg(long, default_value_t = 2049)]
    n: usize,
}

impl GridArgs {
    fn spec(&self, m: u32) -> GridSpec {
        GridSpec { m, y_min: self.y_min, y_max: self.y_max, n: self.n }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write the harmonic profile e^{αR} h(r/s) as CSV plus JSON sidecar.
    Harmonic {
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the nearest harmonic map and print the fit as JSON.
    Project {
        profile: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GATE_DELTA)]
        gate: f64,
    },
    /// Run the flow described by a JSON config into a run directory.
    Flow {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the gauge fields q and ν of a profile as CSV.
    Gauge {
        profile: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        anchor_angle: f64,
    },
    /// Lowest eigenvalues of H = -d²/dy² + 1 - 2 sech² y.
    Spectrum {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Run a named invariant suite (energy, gauge, projection, spectrum,
    /// coercivity, hardy, flow, all).
    Check { suite: String },
}

fn print_json<T: Serialize>(v: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(v).map_err(Failure::usage)?;
    println!("{text}");
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Harmonic { m, s, alpha, grid, out } => {
            commands::harmonic(grid.spec(m), s, alpha, &out)?;
            Ok(0)
        }
        Command::Project { profile, gate } => {
            let (out, code) = commands::project(&profile, gate)?;
            print_json(&out)?;
            Ok(code)
        }
        Command::Flow { config, out } => {
            let seed = std::env::var(SEED_ENV).ok();
            let manifest = commands::flow(&config, &out, seed.as_deref())?;
            eprintln!("wrote {} files to {}", manifest.files.len() + 1, out.display());
            Ok(0)
        }
        Command::Gauge { profile, out, anchor_angle } => {
            print_json(&commands::gauge(&profile, &out, anchor_angle)?)?;
            Ok(0)
        }
        Command::Spectrum { k, grid } => {
            print_json(&commands::spectrum(grid.spec(1), k)?)?;
            Ok(0)
        }
        Command::Check { suite } => {
            let (out, code) = commands::check(&suite)?;
            print_json(&out)?;
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
