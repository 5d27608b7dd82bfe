//! Scenario-driven batch runs over the qtomo library.

pub mod config;
pub mod run;

pub use config::{load, Command, ScenarioConfig};
pub use run::run_scenario;
