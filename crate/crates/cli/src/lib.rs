//! Experiment harness for `projdiff`: configuration, simulation, trace
//! analysis, model generation and the invariant-check suite.

pub mod analyze;
pub mod checks;
pub mod config;
pub mod error;
pub mod experiment;
pub mod genmodel;
pub mod simulate;

pub use error::CliError;
