//! Config-driven scenarios on top of `deltaprime-core`: TOML in, CSV out.

pub mod config;
pub mod error;
pub mod scenario;
pub mod table;
pub mod validate;

pub use config::{load_config, parse_config, Scenario, ScenarioConfig};
pub use error::CliError;
pub use scenario::run_scenario;
pub use table::{write_csv, ResultTable};
