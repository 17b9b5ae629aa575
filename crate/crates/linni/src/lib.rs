//! Batch driver for the verification pipelines: configuration, the finite-volume grid
//! oracle, and JSON/CSV artifacts.

pub mod checks;
pub mod config;
pub mod grid;
pub mod report;
pub mod run;
