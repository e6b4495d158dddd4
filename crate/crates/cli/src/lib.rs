//! Scenario-driven batch runner for the FW condition checks.

pub mod run;
pub mod scenario;

pub use run::{emit_tables, evaluate, mismatches, report_json, run, run_scenario, Report, RunError, RunOptions};
pub use scenario::{parse_batch, parse_scenario, Scenario, ScenarioError};
