//! Command implementations, run settings and SVG figures.

mod commands;
mod config;
pub mod svg;

pub use commands::{cmd_bench, cmd_impute, cmd_score, with_jobs, ORACLE_DRAWS};
pub use config::{parse_methods, Experiment, Overrides, RunConfig};
