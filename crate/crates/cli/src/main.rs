use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod cost_cmd;
mod evolve;
mod models;
mod verify;

/// Exit codes, one per error class.
pub mod exit {
    pub const OK: u8 = 0;
    /// clap's own code for bad arguments
    pub const USAGE: u8 = 2;
    pub const PARSE: u8 = 3;
    pub const CAP: u8 = 4;
    pub const VERIFY: u8 = 5;
    pub const RUNTIME: u8 = 6;
    pub const IO: u8 = 7;
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Parse(String),
    Cap(String),
    Verify(String),
    Runtime(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Parse(_) => exit::PARSE,
            CliError::Cap(_) => exit::CAP,
            CliError::Verify(_) => exit::VERIFY,
            CliError::Runtime(_) => exit::RUNTIME,
            CliError::Io(_) => exit::IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Parse(m)
            | CliError::Cap(m)
            | CliError::Verify(m)
            | CliError::Runtime(m)
            | CliError::Io(m) => m,
        }
    }
}

impl From<lindsim::Error> for CliError {
    fn from(e: lindsim::Error) -> Self {
        use lindsim::Error as E;
        match e {
            E::Parse { .. } => CliError::Parse(e.to_string()),
            E::CapExceeded(_) => CliError::Cap(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "lindsim", version, about = "Lindbladian simulation: evolution runs, invariant suites and cost sweeps")]
struct Cli {
    /// simulator qubit cap (dense circuits and compressed-state budget)
    #[arg(long, global = true, env = "LINDSIM_MAX_QUBITS")]
    max_qubits: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve a state and report it next to the exact solution
    Evolve(evolve::EvolveArgs),
    /// Run an invariant suite
    Verify(verify::VerifyArgs),
    /// Gate-count sweeps as CSV
    Cost(cost_cmd::CostArgs),
    /// Write a scenario model file
    Scenario(ScenarioArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioName {
    Depolarizing,
    Xy,
    Collective,
    AmplitudeDamping,
}

/// Model selection shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// model file (JSON)
    #[arg(long, conflicts_with = "scenario")]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioName>,
    /// number of qubits for scenarios
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// XY coupling
    #[arg(long, default_value_t = 1.0)]
    pub coupling: f64,
    /// decay rate (amplitude damping, collective lowering)
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Z field strength (amplitude damping)
    #[arg(long, default_value_t = 0.0)]
    pub hz: f64,
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

pub fn write_output(out: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(cap) = cli.max_qubits {
        std::env::set_var(lindsim::circuit::sim::QUBIT_CAP_ENV, cap.to_string());
    }
    match cli.command {
        Command::Evolve(a) => evolve::run(a),
        Command::Verify(a) => verify::run(a),
        Command::Cost(a) => cost_cmd::run(a),
        Command::Scenario(a) => {
            let model = models::load(&a.model)?;
            let mut text = lindsim::model::serialize_model(&model);
            text.push('\n');
            write_output(a.out.as_ref(), &text)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
