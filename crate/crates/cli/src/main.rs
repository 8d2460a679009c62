//! Command-line runner: one subcommand per computation, CSV for curves,
//! JSON for scalar summaries, and a manifest.json beside every output.

mod commands;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use bloch_siegert::config::RunConfig;
use bloch_siegert::eigen::SolverOptions;
use bloch_siegert::Error;
use clap::{Parser, Subcommand};

use output::{Manifest, OutDir};

#[derive(Parser)]
#[command(name = "bloch-siegert", version, about = "Spin-1 / oscillator numerics: dressed energies, anticrossings, dynamics")]
struct Cli {
    /// TOML configuration file; defaults apply when absent.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, created if needed.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Worker threads for scans (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Seed for the eigensolver start vectors.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Dressed transition energy ratio over a g sweep, with the series and Hermann-Swain forms.
    Dressed,
    /// Locate the multiphoton anticrossing near n0 and report its splitting.
    Resonance,
    /// Labeled eigenvalues of the full Hamiltonian within a window around n0.
    Spectrum,
    /// Fit the level expansion to the labeled spectrum around n0.
    Fit,
    /// Anticrossing splitting over a list of n0.
    SplittingScan,
    /// Estimated and measured critical excitation n_crit.
    Ncrit,
    /// Three-state occupation probabilities over time.
    Dynamics,
    /// Large-n0 constants n0*D, n0*F and I/sqrt(n0) from WKB.
    Wkb,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Dressed => "dressed",
            Command::Resonance => "resonance",
            Command::Spectrum => "spectrum",
            Command::Fit => "fit",
            Command::SplittingScan => "splitting-scan",
            Command::Ncrit => "ncrit",
            Command::Dynamics => "dynamics",
            Command::Wkb => "wkb",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(std::io::Error),
    Config(String),
    /// More than half of a scan failed; outputs were still written.
    Scan { code: u8, message: String },
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// 2 configuration, 3 numerical accuracy, 4 capacity.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) | Error::NoResonance(_) => 2,
        Error::Capacity(_) => 4,
        _ => 3,
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Core(e) => exit_code(e),
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Scan { code, .. } => *code,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o: {e}"),
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Scan { message, .. } => write!(f, "{message}"),
        }
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig, CliError> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("config: cannot read {}: {e}", path.display())))?;
    Ok(RunConfig::from_toml_str(&text)?)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let cfg = load_config(cli.config.as_ref())?;
    let seed = cli.seed.unwrap_or(SolverOptions::default().seed);
    let out = OutDir::create(&cli.out)?;
    let mut manifest = Manifest::new(cli.command.name(), cli.config.clone(), seed);
    let start = Instant::now();
    let mut ctx = commands::Run {
        cfg: &cfg,
        seed,
        out: &out,
        manifest: &mut manifest,
    };
    let result = match cli.command {
        Command::Dressed => commands::dressed(&mut ctx),
        Command::Resonance => commands::resonance(&mut ctx),
        Command::Spectrum => commands::spectrum(&mut ctx),
        Command::Fit => commands::fit(&mut ctx),
        Command::SplittingScan => commands::splitting(&mut ctx),
        Command::Ncrit => commands::ncrit(&mut ctx),
        Command::Dynamics => commands::dynamics(&mut ctx),
        Command::Wkb => commands::wkb(&mut ctx),
    };
    // a failed scan still leaves its partial outputs on record
    if result.is_ok() || matches!(result, Err(CliError::Scan { .. })) || !manifest.outputs.is_empty() {
        manifest.finish(start.elapsed());
        out.write_manifest(&manifest)?;
    }
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
