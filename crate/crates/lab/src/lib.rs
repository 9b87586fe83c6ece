//! Sweeps over lattice sizes for the index experiments, with JSON and CSV output.

pub mod config;
pub mod engine;
pub mod report;
pub mod scenarios;

pub use config::ExperimentConfig;
pub use report::SweepResult;
pub use scenarios::run;
