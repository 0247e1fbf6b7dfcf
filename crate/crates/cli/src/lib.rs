//! Command-line front end for `gravstat`: scenario configs in, CSV or JSON out.

// `!(x > 0)` style guards are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::ScenarioConfig;
pub use error::CliError;
use output::{Format, Output};

#[derive(Debug, Parser)]
#[command(
    name = "gravstat",
    version,
    about = "Graviton counting statistics, coherence and tomography scenarios"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Scenario file (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Worker threads for sweeps; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for injected noise.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Excitation probabilities and their difference from the coherent partner.
    Probs,
    /// Second-order coherence over a sweep grid.
    G2,
    /// Simulated homodyne-correlation tomography round trip.
    Tomo,
    /// Analytic routes against the Fock-space oracle.
    OracleCheck,
    /// Coupling, graviton number and noise margins in SI units.
    Physical,
}

fn load_config(path: Option<&PathBuf>) -> Result<Option<ScenarioConfig>, CliError> {
    let Some(path) = path else { return Ok(None) };
    let raw =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    ScenarioConfig::from_json(&raw).map(Some).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn execute(command: Command, cfg: Option<&ScenarioConfig>, seed: u64) -> Result<Output, CliError> {
    let need = || cfg.ok_or_else(|| CliError::Config("--config is required for this command".into()));
    match command {
        Command::Probs => commands::probs(need()?),
        Command::G2 => commands::g2(need()?),
        Command::Tomo => commands::tomo(need()?, seed),
        Command::OracleCheck => commands::oracle_check(cfg),
        Command::Physical => commands::physical(need()?),
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli.common.config.as_ref())?;
    let output = match cli.common.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
            pool.install(|| execute(cli.command, cfg.as_ref(), cli.common.seed))?
        }
        None => execute(cli.command, cfg.as_ref(), cli.common.seed)?,
    };
    match &cli.common.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            output.write(cli.common.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            output.write(cli.common.format, stdout.lock())?;
        }
    }
    if output.failures > 0 {
        return Err(CliError::ChecksFailed(output.failures));
    }
    Ok(())
}
