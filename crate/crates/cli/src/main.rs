mod commands;
mod manifest;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use opforge_core::rom::{RomKind, Target};

/// Surrogate modeling pipeline for a moving-laser thermal simulation.
#[derive(Debug, Parser)]
#[command(name = "opforge", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample process parameters, simulate each sample and write the dataset.
    Generate(GenerateArgs),
    /// Train one ROM and report its test-split accuracy.
    Train(TrainArgs),
    /// Score a saved model on a dataset split.
    Evaluate(EvaluateArgs),
    /// Train a grid of architectures and rank them by validation RMSE.
    Hypersearch(TrainArgs),
    /// First-order and total Sobol indices of a saved model.
    Sensitivity(SensitivityArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Root seed; every stage derives its own stream from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (falls back to OPFORGE_WORKERS, then the CPU count).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Campaign TOML; defaults apply to missing keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_parser = parse_kind)]
    pub model_kind: RomKind,
    #[arg(long, value_parser = parse_target, default_value = "scalar")]
    pub target: Target,
    /// TOML with optional [model], [train], `grid` and `groups` entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_parser = parse_target, default_value = "scalar")]
    pub target: Target,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Base sample count, rounded up to a power of two.
    #[arg(long, default_value_t = 1024)]
    pub n_base: usize,
    #[command(flatten)]
    pub common: Common,
}

fn parse_kind(s: &str) -> Result<RomKind, String> {
    RomKind::parse(s).map_err(|e| e.to_string())
}

fn parse_target(s: &str) -> Result<Target, String> {
    Target::parse(s).map_err(|e| e.to_string())
}

fn error_line(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": kind, "message": message }).to_string()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", error_line("usage", first));
            return ExitCode::from(2);
        }
    };
    match commands::run(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let (kind, code) = match &e {
                commands::CliError::Usage(_) | commands::CliError::Core(opforge_core::Error::InvalidInput(_)) => {
                    ("usage", 2)
                }
                commands::CliError::Core(c) => (c.kind(), 1),
            };
            eprintln!("{}", error_line(kind, &e.to_string().replace('\n', " ")));
            ExitCode::from(code)
        }
    }
}
