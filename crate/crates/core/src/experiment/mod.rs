//! Configuration-driven experiments and their table outputs.

pub mod config;
pub mod output;
pub mod runner;

pub use config::{ConfigError, ExperimentConfig};
pub use runner::{
    export_bloch, run_gates, run_sequence, run_sweep, BlochSample, ExperimentError, GateResult, Model,
    SequenceResult, SequenceRow, Simulator, SweepRow,
};
