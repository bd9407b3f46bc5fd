use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qjump_cli::{cmd_evolve, cmd_fit, cmd_plot, cmd_simulate_experiment, CliResult, FitMode, GlobalOpts, Report};
use qjump_core::DecayType;

#[derive(Parser)]
#[command(name = "qjump", version, about = "Quantum-jump channels on path-encoded qutrits")]
struct Cli {
    /// Scenario file (flat TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overrides the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overrides QJUMP_OUT_DIR and the config
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Expected counts instead of Poisson draws
    #[arg(long, global = true)]
    noiseless: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Image,
    Fringe,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pair {
    #[value(name = "12")]
    P12,
    #[value(name = "13")]
    P13,
    #[value(name = "23")]
    P23,
}

#[derive(Clone, Copy, ValueEnum)]
enum Decay {
    Cascade,
    Lambda,
    V,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form theory curves for the configured sweep
    Evolve,
    /// Synthetic frames and estimates for every sweep sample
    SimulateExperiment,
    /// Fit a `position,value` profile
    Fit {
        profile: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Beam pair of a fringe profile, used with --config for the period hint
        #[arg(long, value_enum, default_value = "12")]
        pair: Pair,
    },
    /// SVG panels from theory and estimate tables
    Plot {
        #[arg(long, required = true)]
        theory: Vec<PathBuf>,
        #[arg(long)]
        estimates: Vec<PathBuf>,
        /// Skip inference from the probability columns
        #[arg(long, value_enum)]
        decay_type: Option<Decay>,
    },
}

fn run(cli: Cli) -> CliResult<Report> {
    let opts = GlobalOpts { config: cli.config, seed: cli.seed, out: cli.out, noiseless: cli.noiseless };
    match cli.command {
        Command::Evolve => cmd_evolve(&opts),
        Command::SimulateExperiment => cmd_simulate_experiment(&opts),
        Command::Fit { profile, mode, pair } => {
            let mode = match mode {
                Mode::Image => FitMode::Image,
                Mode::Fringe => FitMode::Fringe,
            };
            let pair = match pair {
                Pair::P12 => (1, 2),
                Pair::P13 => (1, 3),
                Pair::P23 => (2, 3),
            };
            cmd_fit(&opts, &profile, mode, pair)
        }
        Command::Plot { theory, estimates, decay_type } => {
            let t = decay_type.map(|d| match d {
                Decay::Cascade => DecayType::Cascade,
                Decay::Lambda => DecayType::Lambda,
                Decay::V => DecayType::V,
            });
            cmd_plot(&opts, &theory, &estimates, t)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            print!("{}", report.summary);
            if report.success() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
