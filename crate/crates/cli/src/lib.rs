//! Experiment driver behind the `shapsched` binary: loads a workload, runs the
//! chosen policies against the exact fair reference and writes CSV.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{
    parse_seeds, policy_from_name, policy_label, sample_count, ExperimentConfig, SampleSettings,
    WorkloadSource,
};
pub use experiment::{run_experiment, run_loaded, run_sweep, ExperimentReport, PolicyResult, SweepRow, Workload};
pub use output::{write_summary, write_sweep, write_trace};
