//! `sphere-lp`: universal energy bounds for weighted spherical codes and designs.

mod commands;
mod output;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Parser)]
#[command(name = "sphere-lp", version, about = "Linear programming energy bounds on the sphere")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Universal lower bound for weighted codes.
    Ulb(BoundArgs),
    /// Universal upper bound for codes with maximal inner product s.
    Uub(UubArgs),
    /// Lower bound for weighted spherical designs.
    DesignUlb(DesignArgs),
    /// Upper bound for weighted spherical designs.
    DesignUub(DesignUubArgs),
    /// Energy of a built-in configuration or a JSON code file.
    Energy(CodeArgs),
    /// Design strength of a code.
    DesignCheck(CheckArgs),
    /// Delsarte-Levenshtein test functions Q_j.
    TestFunctions(TestFunctionArgs),
    /// Regenerate the reference tables and compare with their printed values.
    Reproduce(ReproduceArgs),
}

/// Where `n` and `N_W` come from.
#[derive(Args, Clone, Debug)]
pub struct Source {
    /// Dimension of the ambient space.
    #[arg(long)]
    pub n: Option<usize>,
    /// Weighted capacity N_W = 1 / sum w_i^2.
    #[arg(long, conflicts_with_all = ["weights_file", "config"])]
    pub capacity: Option<f64>,
    /// JSON file with a weight array or a full code {n, points, weights}.
    #[arg(long, conflicts_with = "config")]
    pub weights_file: Option<PathBuf>,
    /// Built-in configuration (pentakis, cube-cross:N, ngon:M, ...) or a JSON code file.
    #[arg(long)]
    pub config: Option<String>,
}

#[derive(Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub source: Source,
    /// Potential, e.g. riesz:1, newton, gaussian:2.5, log, fejes-toth, shift:2:fejes-toth.
    #[arg(long, default_value = "newton")]
    pub potential: String,
}

#[derive(Args)]
pub struct UubArgs {
    #[command(flatten)]
    pub bound: BoundArgs,
    /// Maximal inner product; taken from the code when --config is given.
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,
    /// Use this degree instead of the one selected from s.
    #[arg(long)]
    pub m_override: Option<usize>,
}

#[derive(Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub bound: BoundArgs,
    /// Design strength; defaults to the strength of --config.
    #[arg(long)]
    pub tau: Option<usize>,
}

#[derive(Args)]
pub struct DesignUubArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,
}

#[derive(Args)]
pub struct CodeArgs {
    #[arg(long, required_unless_present = "weights_file")]
    pub config: Option<String>,
    /// JSON code file {n, points, weights}.
    #[arg(long, conflicts_with = "config")]
    pub weights_file: Option<PathBuf>,
    #[arg(long, default_value = "newton")]
    pub potential: String,
}

#[derive(Args)]
pub struct CheckArgs {
    #[arg(long, required_unless_present = "weights_file")]
    pub config: Option<String>,
    #[arg(long, conflicts_with = "config")]
    pub weights_file: Option<PathBuf>,
    /// Largest moment order examined.
    #[arg(long, default_value_t = 20)]
    pub tau: usize,
    /// Moment tolerance.
    #[arg(long, default_value_t = sphere_lp::codes::MOMENT_TOL)]
    pub tol: f64,
}

#[derive(Args)]
pub struct TestFunctionArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub capacity: f64,
    /// Largest index j.
    #[arg(long)]
    pub jmax: usize,
}

#[derive(Args)]
pub struct ReproduceArgs {
    /// 1, 2, 3, 4 or examples.
    #[arg(long)]
    pub table: reproduce::Table,
    /// Replace the printed-precision tolerance of every decimal cell.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Count cells that equal the truncated or rounded-up value as passing.
    #[arg(long)]
    pub accept_truncated: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("bound certificate failed")]
    Infeasible(String),
    #[error("{count} cell(s) differ from the printed values")]
    Mismatch { count: usize, output: String },
}

impl From<sphere_lp::error::Error> for CliError {
    fn from(e: sphere_lp::error::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::Mismatch { .. } => 3,
        }
    }
}

fn init_logging() -> Result<(), CliError> {
    let level = std::env::var("SPHERE_LP_LOG").unwrap_or_else(|_| "off".into());
    let filter = match level.as_str() {
        "off" | "" => log::LevelFilter::Off,
        "info" => log::LevelFilter::Info,
        "debug" => log::LevelFilter::Debug,
        other => {
            return Err(CliError::Usage(format!("SPHERE_LP_LOG must be off, info or debug (got `{other}`)")))
        }
    };
    env_logger::Builder::new().filter_level(filter).target(env_logger::Target::Stderr).init();
    Ok(())
}

fn run(cli: Cli) -> Result<String, CliError> {
    init_logging()?;
    let fmt = cli.format;
    match cli.command {
        Command::Ulb(a) => commands::ulb(&a, fmt),
        Command::Uub(a) => commands::uub(&a, fmt),
        Command::DesignUlb(a) => commands::design_ulb(&a, fmt),
        Command::DesignUub(a) => commands::design_uub(&a, fmt),
        Command::Energy(a) => commands::energy(&a, fmt),
        Command::DesignCheck(a) => commands::design_check(&a, fmt),
        Command::TestFunctions(a) => commands::test_functions(&a, fmt),
        Command::Reproduce(a) => reproduce::run(&a, fmt),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(CliError::Infeasible(out)) => {
            print!("{out}");
            eprintln!("error: bound certificate failed; see diagnostics");
            ExitCode::from(2)
        }
        Err(CliError::Mismatch { count, output }) => {
            print!("{output}");
            eprintln!("error: {count} cell(s) differ from the printed values");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
