mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, ModeName, Overrides};

#[derive(Parser)]
#[command(name = "fairderand", version, about = "Derandomize stochastic classifiers and audit their fairness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeName>,
    /// Monte Carlo trials.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Largest number of point pairs examined before sampling.
    #[arg(long, global = true)]
    pairs_cap: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one deterministic classifier and record its parameters and predictions.
    Derandomize,
    /// Measure bias, variance and fairness next to their bounds.
    Audit,
    /// Build the sphere counterexample or search a threshold family for a violation.
    Adversarial,
    /// Best responses of agents paying a metric cost to move.
    Strategic,
    /// Evaluate a named bound from key=value inputs; lists bounds when no name is given.
    Bounds {
        name: Option<String>,
        inputs: Vec<String>,
    },
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Data(String),
    NotEnumerable(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Data(_) => 3,
            Failure::NotEnumerable(_) => 4,
            Failure::Other(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Data(m) => write!(f, "data error: {m}"),
            Failure::NotEnumerable(m) => write!(f, "{m}"),
            Failure::Other(m) => write!(f, "{m}"),
        }
    }
}

impl From<fairderand::Error> for Failure {
    fn from(e: fairderand::Error) -> Self {
        use fairderand::Error::*;
        let msg = e.to_string();
        match e {
            NotEnumerable(_) | FamilyTooLarge { .. } => Failure::NotEnumerable(format!("{msg}; use --mode mc")),
            InvalidParameter(_) | GridTooCoarse { .. } => Failure::Config(msg),
            Io(_) => Failure::Other(msg),
            _ => Failure::Data(msg),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let flags = Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
        mode: cli.mode,
        trials: cli.trials,
        pairs_cap: cli.pairs_cap,
    };
    if let Command::Bounds { name, inputs } = &cli.command {
        let (report, _) = commands::bound(name.as_deref(), inputs, cli.out.as_deref())?;
        println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Failure::Other(e.to_string()))?);
        return Ok(());
    }
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config is required".into()))?;
    let (cfg, base) = ExperimentConfig::load(path, &flags)?;
    let written = match cli.command {
        Command::Derandomize => commands::derandomize(&cfg, &base)?,
        Command::Audit => commands::audit(&cfg, &base)?,
        Command::Adversarial => commands::adversarial(&cfg, &base)?,
        Command::Strategic => commands::strategic(&cfg, &base)?,
        Command::Bounds { .. } => unreachable!("handled above"),
    };
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
