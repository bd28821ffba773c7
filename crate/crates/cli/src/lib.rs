//! Configuration, presets and commands behind the `netbench` binary.

pub mod commands;
pub mod config;
pub mod duration;
pub mod presets;

pub use commands::{cmd_plan, cmd_run, cmd_sweep, run_experiment, run_sweep, Overrides};
pub use config::ExperimentConfig;
