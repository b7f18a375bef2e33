//! Config-driven command-line front end.

pub mod config;
pub mod report;
pub mod run;

pub use config::{load_config, Overrides, RunConfig};
pub use report::{emit_report, ReportBundle, RunOutput, Summary};
pub use run::{run_scan, Command};
