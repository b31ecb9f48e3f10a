//! Scenario runner for the tracking controllers of `manifold_ctrl`: JSON
//! configs and built-in scenarios in, CSV time series and JSON summaries out.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use config::{ScenarioConfig, ScenarioName};
pub use error::CliError;
