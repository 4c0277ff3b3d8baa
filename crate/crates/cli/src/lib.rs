//! Scenario runner for the `cframe` certifiers: TOML scenario files in,
//! JSON-lines records and CSV tables out.

pub mod error;
pub mod generate;
pub mod runner;
pub mod scenario;
pub mod sweep;

pub use error::{CliError, EXIT_MISSING, EXIT_OK, EXIT_PARSE, EXIT_VERDICT};
pub use runner::{run_scenario, RunOptions};
pub use scenario::{Kind, Scenario};
pub use sweep::{sweep, SweepRow};
