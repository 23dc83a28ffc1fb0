//! `qmemlab`: runs one study per subcommand from a TOML config.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "qmemlab", version, about = "Thermal stability studies for quantum memory models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Spectral density checks, correlation tail and gate-time bound.
    BathAudit(CommonArgs),
    /// Exact spectral gaps of the toric-code sector generator.
    KitaevGap(CommonArgs),
    /// Kinetic Monte Carlo lifetimes of bare and majority-decoded Ising bits.
    IsingLifetime(CommonArgs),
    /// Kinetic Monte Carlo lifetimes of bare and matching-decoded toric logicals.
    KitaevLifetime(CommonArgs),
    /// Stationarity, relaxation, detailed balance and negativity of Davies generators.
    DaviesProperties(CommonArgs),
    /// Operator support growth weighted by bath correlations, fit to an exponential law.
    ErrormapAudit(CommonArgs),
}

#[derive(Args, Clone, Default)]
pub struct CommonArgs {
    /// TOML config; every key is optional.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Master seed (overrides `seed` in the config).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(std::io::Error),
}

impl From<qmemlab::Error> for CliError {
    fn from(e: qmemlab::Error) -> Self {
        match e {
            qmemlab::Error::Io(io) => CliError::Io(io),
            e if e.is_validation() => CliError::Config(e.to_string()),
            e => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        qmemlab::Error::from(e).into()
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

fn threads(command: &Command) -> Option<usize> {
    match command {
        Command::BathAudit(a)
        | Command::KitaevGap(a)
        | Command::IsingLifetime(a)
        | Command::KitaevLifetime(a)
        | Command::DaviesProperties(a)
        | Command::ErrormapAudit(a) => a.threads,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = threads(&cli.command) {
        if n == 0 {
            eprintln!("invalid configuration: --threads must be ≥ 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot start thread pool: {e}");
            return ExitCode::from(3);
        }
    }
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
