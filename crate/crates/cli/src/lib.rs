//! Scenario runner for `cra-photon`: TOML configs in, CSV tables and a
//! `metadata.json` out.

pub mod config;
pub mod error;
pub mod output;
pub mod scenarios;

pub use config::{ScenarioConfig, ScenarioKind};
pub use error::{CliError, CliResult};
pub use scenarios::run_scenario;
