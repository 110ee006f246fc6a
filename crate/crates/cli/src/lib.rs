//! Library side of the `kramers` command: config parsing, the subcommands
//! and the run manifest. `main.rs` only parses flags and maps errors to exit
//! codes.

pub mod checks;
pub mod commands;
pub mod config;
pub mod manifest;

use thiserror::Error;

pub use config::RunConfig;
pub use manifest::{CheckRecord, Run, RunManifest};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] kramers_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    /// 2 for anything the user must fix in the config, 1 for runtime and
    /// check failures.
    pub fn exit_code(&self) -> i32 {
        use kramers_core::Error as E;
        match self {
            Self::Config(_) => 2,
            Self::Core(
                E::InvalidParameter { .. }
                | E::DomainMismatch(_)
                | E::ClassicalLimit
                | E::DistributionalDensity
                | E::NonIntegrableSpectrum(_)
                | E::DegenerateClassicalGroundState
                | E::MasslessBathMode { .. },
            ) => 2,
            Self::Core(_) | Self::Io(_) | Self::ChecksFailed(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Kernels,
    DetCheck,
    Simulate,
    Decohere,
    Checks,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Kernels => "kernels",
            Self::DetCheck => "det-check",
            Self::Simulate => "simulate",
            Self::Decohere => "decohere",
            Self::Checks => "paper-checks",
        }
    }
}

/// Runs one subcommand and writes `manifest.json` into `run.out`, even when
/// a check fails. Config errors abort before anything is written.
pub fn execute(command: Command, cfg: &RunConfig, run: &mut Run) -> Result<(), CliError> {
    let result = match command {
        Command::Kernels => commands::kernels(cfg, run),
        Command::DetCheck => commands::det_check(cfg, run),
        Command::Simulate => commands::simulate(cfg, run),
        Command::Decohere => commands::decohere(cfg, run),
        Command::Checks => checks::paper_checks(run),
    };
    if let Err(e) = &result {
        if e.exit_code() == 2 {
            return result;
        }
    }
    let manifest = run.manifest(command.name(), cfg);
    manifest.write_atomic(&run.out)?;
    result?;
    let failed = run.checks().iter().filter(|c| !c.pass).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(kramers_core::Error::ClassicalLimit).exit_code(), 2);
        let unstable = kramers_core::Error::Unstable { dt: 1.0, max_dt: 0.5, suggested: 0.4 };
        assert_eq!(CliError::Core(unstable).exit_code(), 1);
        assert_eq!(CliError::ChecksFailed(3).exit_code(), 1);
    }
}
