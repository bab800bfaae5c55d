//! Monte Carlo experiments and file I/O.

pub mod exec;
pub mod experiment;
pub mod io;
pub mod stats;

pub use exec::{replicate, Execution};
pub use experiment::{
    aggregate, run_experiment, run_experiment_with, Aggregates, ExperimentConfig, ExperimentKind,
    ExperimentReport, Table,
};
pub use io::{read_path, read_path_csv, write_path, write_path_csv, write_table, write_trajectory};
pub use stats::{ks_distance, ks_two_sample, mean, quantile, std_error, variance};
