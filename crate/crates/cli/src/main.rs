use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kramers_cli::{execute, CliError, Command, Run, RunConfig};

/// Bath kernels, Langevin and Fokker-Planck numerics, sliced determinants
/// and decoherence for a particle in a harmonic-oscillator bath.
#[derive(Debug, Parser)]
#[command(name = "kramers", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Flat `section.key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "kramers-out")]
    out: PathBuf,
    /// Master seed; replaces `sim.seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Tabulate σ(ω), K(ω), γ(t) and K(t).
    Kernels,
    /// Sliced determinant identities and trace-log rates.
    DetCheck,
    /// Langevin ensemble, Fokker-Planck solve and their comparison.
    Simulate,
    /// Two-Gaussian superposition under the master equation.
    Decohere,
    /// Full acceptance suite.
    #[command(visible_alias = "paper-checks")]
    Checks,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set("sim.seed", seed.to_string());
    }
    let command = match cli.command {
        Cmd::Kernels => Command::Kernels,
        Cmd::DetCheck => Command::DetCheck,
        Cmd::Simulate => Command::Simulate,
        Cmd::Decohere => Command::Decohere,
        Cmd::Checks => Command::Checks,
    };
    let mut out = Run::new(&cli.out, cli.quiet)?;
    execute(command, &cfg, &mut out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kramers: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
