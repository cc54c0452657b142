//! Experiment configuration, drivers and output for the `apdg` CLI.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod output;
