//! File formats, configuration and the experiment runner behind the
//! `tenscomp` binary.

pub mod config;
pub mod experiment;
pub mod io;

pub use config::{ExperimentConfig, MaskSource, MethodName, PartialConfig, SolverSettings};
pub use experiment::{run_experiment, CompletionReport};
