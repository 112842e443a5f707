//! `pdcsim`: rainbow geometry, up-conversion satellites and zeropoint
//! ensembles from the command line.

mod commands;
mod manifest;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Environment variable naming the default crystal database.
pub const DB_ENV: &str = "PDCSIM_CRYSTAL_DB";

#[derive(Debug, Parser)]
#[command(name = "pdcsim", version, about = "Parametric down-conversion rainbow and zeropoint-field simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emission angles of the down-conversion rainbow.
    Rainbow(RainbowArgs),
    /// Geometry of the up-conversion satellite.
    Puc(PucArgs),
    /// Monte Carlo ensemble of one coupled triple.
    Simulate(SimulateArgs),
    /// List or validate the crystal database.
    Crystals(CrystalsArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Crystal name from the database.
    #[arg(long)]
    pub crystal: Option<String>,
    /// Crystal database file (defaults to the built-in one).
    #[arg(long, env = DB_ENV)]
    pub db: Option<PathBuf>,
    /// Angle between pump and optic axis in degrees, or `principal`.
    #[arg(long)]
    pub cut_angle_deg: Option<String>,
    /// Output file; stdout when absent. A manifest is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// TOML file with defaults for any flag of this command.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RainbowArgs {
    #[command(flatten)]
    pub common: Common,
    /// Pump as `<wavelength_nm><o|e>`, e.g. `300e`.
    #[arg(long)]
    pub pump: Option<String>,
    /// Comma-separated signal wavelengths in nm.
    #[arg(long, conflicts_with = "range")]
    pub grid: Option<String>,
    /// Evenly spaced grid `start:end:count` in nm.
    #[arg(long)]
    pub range: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct PucArgs {
    #[command(flatten)]
    pub common: Common,
    /// Ordinary laser as `<wavelength_nm>o`.
    #[arg(long)]
    pub pump: Option<String>,
    /// Extraordinary vacuum partner wavelength(s) in nm, comma-separated.
    #[arg(long)]
    pub partner: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    Pdc,
    Puc,
    /// Matched pdc and puc runs plus their satellite ratio.
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioArg>,
    /// Down-conversion pump, `<wavelength_nm>e` (pdc).
    #[arg(long)]
    pub pump: Option<String>,
    /// Signal wavelength of the down-conversion triple in nm (pdc).
    #[arg(long)]
    pub signal: Option<f64>,
    /// Up-conversion laser, `<wavelength_nm>o` (puc).
    #[arg(long)]
    pub laser: Option<String>,
    /// Extraordinary vacuum partner wavelength in nm (puc).
    #[arg(long)]
    pub partner: Option<f64>,
    /// Laser amplitude in units of the zeropoint amplitude.
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub depth: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Detection threshold in units of the mean zeropoint intensity.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CrystalsArgs {
    #[arg(long, env = DB_ENV)]
    pub db: Option<PathBuf>,
    /// Re-check every crystal invariant; exit 1 on violation.
    #[arg(long)]
    pub validate: bool,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Where to write the reproduced output (defaults to stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pdcsim: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
