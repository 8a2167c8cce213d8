//! Experiment harness: config parsing, the named experiments, and table
//! emission in CSV or JSON.

pub mod config;
pub mod emit;
pub mod experiments;

pub use config::Config;
pub use emit::{Format, Table};
pub use experiments::{list_experiments, run_experiment, RunOptions};
