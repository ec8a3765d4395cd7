//! Experiment harness for the SA / SAM / SAQ comparison.
//!
//! A sweep is described by an [`ExperimentConfig`]. [`runner::generate`]
//! writes problem instances and their cached ground-state sets,
//! [`runner::run`] executes the repetitions and appends one
//! [`ResultRecord`] per cell to a JSON-lines file, and [`report`] /
//! [`crossover`] turn those records into plot-ready tables.

pub mod config;
pub mod crossover;
pub mod error;
pub mod records;
pub mod report;
pub mod runner;
pub mod store;

pub use config::{ExperimentConfig, Solver};
pub use error::{BenchError, Result};
pub use records::ResultRecord;
