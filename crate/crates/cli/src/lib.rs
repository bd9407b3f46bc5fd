//! Command-line front end: scenario configuration, sweeps, synthetic
//! experiments, standalone fits and plots.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod plot;

pub use commands::{cmd_evolve, cmd_fit, cmd_plot, cmd_simulate_experiment, FitMode, GlobalOpts, Report, OUT_DIR_ENV};
pub use config::{SaveFrames, Scenario, ScenarioConfig, SweepMode};
pub use error::{CliError, CliResult};
