mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use jpstate::verify::Suite;

use crate::commands::Figure;
use crate::config::RunConfig;
use crate::error::CliError;

/// Conditional state preparation on a beam splitter: Jacobi-polynomial
/// states, their phase-space functions and realistic photon chopping.
#[derive(Debug, Parser)]
#[command(name = "jpstate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML file with default values for any of the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    run: RunConfig,
}

impl Common {
    /// Flags, then the config file, then `defaults`.
    fn resolve(self, defaults: RunConfig) -> Result<RunConfig, CliError> {
        let file = self.config.as_deref().map(RunConfig::load).transpose()?.unwrap_or_default();
        Ok(self.run.over(file).over(defaults))
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Conditional state amplitudes, normalization and P(n, m).
    Conditional(Common),
    /// P(n, m) for m = 0 ..= m-max.
    ProbMap(Common),
    /// Quadrature-component distribution of the conditional state.
    Quadrature(Common),
    /// Wigner function of the conditional state on a square grid.
    Wigner(Common),
    /// Husimi function of the conditional state on a square grid.
    Husimi(Common),
    /// Photon-number distribution, mean and Mandel Q.
    PhotonStats(Common),
    /// Click probabilities of the photon-chopping detector.
    Chopping(Common),
    /// Posterior over the mode-2 photon number given the clicks.
    Posterior(Common),
    /// Mixed conditional output for a binomial ancilla mixture.
    Mixture(Common),
    /// Data behind one of the reproduced figures.
    Figure {
        #[arg(value_enum)]
        fig: Figure,
        #[command(flatten)]
        common: Common,
    },
    /// Run verification suites; all suites when none is named.
    Verify {
        #[arg(long = "suite")]
        suites: Vec<Suite>,
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let none = RunConfig::default;
    match cli.command {
        Command::Conditional(c) => commands::conditional(&c.resolve(none())?),
        Command::ProbMap(c) => commands::prob_map(&c.resolve(none())?),
        Command::Quadrature(c) => commands::quadrature(&c.resolve(none())?),
        Command::Wigner(c) => commands::wigner(&c.resolve(none())?),
        Command::Husimi(c) => commands::husimi(&c.resolve(none())?),
        Command::PhotonStats(c) => commands::photon_stats(&c.resolve(none())?),
        Command::Chopping(c) => commands::chopping(&c.resolve(none())?),
        Command::Posterior(c) => commands::posterior(&c.resolve(none())?),
        Command::Mixture(c) => commands::mixture(&c.resolve(none())?),
        Command::Figure { fig, common } => commands::figure(fig, &common.resolve(fig.defaults())?),
        Command::Verify { suites, common } => commands::verify(&suites, &common.resolve(none())?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jpstate: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
