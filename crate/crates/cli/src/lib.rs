//! Batch front-end for the experiment harness: config parsing, job dispatch,
//! report, CSV and plot emission, and replay checks.

pub mod config;
pub mod error;
pub mod plot;
pub mod run;

pub use config::{parse_config, parse_config_str, RunConfig};
pub use error::{CliError, Issue, IssueKind};
pub use run::{replay_check, run, write_atomic, JobOutcome, RunOptions, RunSummary};
