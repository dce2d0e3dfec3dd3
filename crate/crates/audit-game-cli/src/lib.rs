//! Experiment harness around the audit-game library: config parsing,
//! subcommand execution, and deterministic figure-data emission.

pub mod commands;
pub mod config;
pub mod figures;
pub mod manifest;

pub use commands::{run_command, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK};
