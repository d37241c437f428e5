//! Command-line front end: orbit analysis, embedding, noise generation and shimming
//! experiments, each writing plot-ready CSV and JSON files.

pub mod commands;
pub mod config;
pub mod error;
pub mod presets;

pub use commands::{
    cmd_embed, cmd_noise_gen, cmd_orbits, cmd_run, execute, EmbedOptions, RunArtifacts, RunSummary,
};
pub use config::{ExperimentConfig, ModelSpec};
pub use error::{CliError, CliResult};
pub use presets::ExperimentPreset;
