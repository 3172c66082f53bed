//! Experiment harness: declarative configs, named presets, CSV traces, and
//! the `dqn-sim` command line.

pub mod cli;
pub mod config;
pub mod csv;
pub mod presets;

pub use config::{Experiment, ExperimentConfig, MethodConfig, NetworkConfig, ProblemConfig, RunSectionConfig};
