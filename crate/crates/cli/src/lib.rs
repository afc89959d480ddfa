//! Command-line front end: scenario generation, single solves, batch
//! benchmarks and the information-load calculator.
//!
//! Every command is a plain function here so tests and other tools can call
//! it without spawning the binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{
    cmd_bench, cmd_gen, cmd_info_load, cmd_solve, BenchReport, InfoLoadTable, SolveReport,
};
pub use config::{ExperimentConfig, MapSpec, SolverName, SolverSettings};
pub use error::CliError;
