//! `equiregion`: region sweeps, identity checks, corollary cross-checks and
//! finite-blocklength binning simulations from the command line.
//!
//! Exit codes: 0 success, 1 failed check or I/O error, 2 invalid input,
//! 3 resource budget exceeded.

mod corollary;
mod identities;
mod output;
mod region;
mod simulate;
mod source;

use std::fmt;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use equiregion::osrb::OsrbError;
use equiregion::{ProbError, RegionError};

/// Worker count override for the rayon pool.
pub const THREADS_ENV: &str = "EQUIREGION_THREADS";

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Budget(String),
    Check(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Check(_) | Self::Io(_) => 1,
            Self::Validation(_) => 2,
            Self::Budget(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Validation(m) => write!(f, "invalid input: {m}"),
            Self::Budget(m) => write!(f, "budget exceeded: {m}"),
            Self::Check(m) => write!(f, "check failed: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<ProbError> for CliError {
    fn from(e: ProbError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<RegionError> for CliError {
    fn from(e: RegionError) -> Self {
        match e {
            RegionError::SearchTooLarge(m) => Self::Budget(m),
            other => Self::Validation(other.to_string()),
        }
    }
}

impl From<OsrbError> for CliError {
    fn from(e: OsrbError) -> Self {
        match e {
            OsrbError::BudgetExceeded { .. } => Self::Budget(e.to_string()),
            OsrbError::Region(r) => r.into(),
            other => Self::Validation(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "equiregion", version, about = "Rate-distortion-equivocation regions with side information and a shared key")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep the region boundary along the rate or distortion axis.
    Region(region::RegionArgs),
    /// Check the four equivalent forms of the equivocation bound on random joints.
    Identities(identities::IdentitiesArgs),
    /// Evaluate the binning protocols exactly at small blocklengths.
    Simulate(simulate::SimulateArgs),
    /// Compare a special-case boundary against the general search.
    Corollary(corollary::CorollaryArgs),
}

/// Search options shared by the boundary commands.
#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Simplex grid resolution.
    #[arg(long, default_value_t = 8)]
    pub grid: u32,
    /// Seed for the local-search restarts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Size of the V alphabet (default |X|).
    #[arg(long)]
    pub v_size: Option<usize>,
    /// Size of the U alphabet (default |X|).
    #[arg(long)]
    pub u_size: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Auto,
    Exhaustive,
    Local,
}

impl SearchArgs {
    pub fn config(&self) -> equiregion::SearchConfig {
        use equiregion::region::SearchMode;
        equiregion::SearchConfig {
            grid: self.grid,
            seed: self.seed,
            v_size: self.v_size,
            u_size: self.u_size,
            mode: match self.mode {
                ModeArg::Auto => SearchMode::Auto,
                ModeArg::Exhaustive => SearchMode::Exhaustive,
                ModeArg::Local => SearchMode::Local,
            },
            ..equiregion::SearchConfig::default()
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("{THREADS_ENV}: expected a positive integer, got `{text}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Io(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Region(a) => region::run(&a),
        Command::Identities(a) => identities::run(&a),
        Command::Simulate(a) => simulate::run(&a),
        Command::Corollary(a) => corollary::run(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("equiregion: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
