use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use windfarm_core::Error as CoreError;

mod commands;
mod config;
mod report;

use config::{Overrides, RunConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_TRAINING: u8 = 4;

/// Wind forecasting, yaw control and UAV inspection planning for a wind farm.
#[derive(Debug, Parser)]
#[command(name = "windfarm", version)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Weight bit width of the deployed forecaster; 32 keeps it in float.
    #[arg(long, global = true, value_parser = ["2", "4", "8", "16", "32"])]
    bits: Option<String>,
    /// 5-minute wind CSV.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Report directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Forecast accuracy by input resolution and by weight bit width.
    Forecast,
    /// Turbine energy with yaw driven by measured and forecast wind.
    Yaw,
    /// Baseline and wind-aware inspection plans for the fleet.
    Route,
    /// Hour-by-hour yaw and inspection planning over the held-out span.
    Simulate,
    /// Writes a synthetic 5-minute wind CSV.
    Synth {
        #[arg(long, default_value_t = 28)]
        days: usize,
        /// Output file.
        output: PathBuf,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<CoreError>()) {
        Some(
            CoreError::UnreachableTurbines(_)
            | CoreError::InfeasibleTour
            | CoreError::InfeasibleTurbine { .. }
            | CoreError::WindExceedsResistance { .. }
            | CoreError::SolverCapExceeded { .. }
            | CoreError::LegInfeasible { .. }
            | CoreError::DegenerateLeg { .. },
        ) => EXIT_INFEASIBLE,
        Some(CoreError::Training(_) | CoreError::Model(_) | CoreError::QuantizationDegenerate) => EXIT_TRAINING,
        _ => EXIT_CONFIG,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let overrides = Overrides {
        seed: cli.seed,
        bits: cli.bits.as_deref().map(str::parse).transpose()?,
        data: cli.data,
        output: cli.out,
    };
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Forecast => commands::forecast(&cfg),
        Command::Yaw => commands::yaw(&cfg),
        Command::Route => commands::route(&cfg),
        Command::Simulate => commands::simulate(&cfg),
        Command::Synth { days, output } => commands::synth(days, cfg.seed, &output),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
