//! Benchmark harness: the active-learning loop, metrics, replications and
//! on-disk output.

mod config;
mod metrics;
mod output;
mod runner;
mod streams;
mod trace;

pub use config::{ExperimentConfig, SCHEMA_VERSION};
pub use metrics::{
    aggregate, brier, edge_sample_rate, expected_classification_error, is_edge_point, AggregateRow, Summary,
    EDGE_FRACTION,
};
pub use output::{
    aggregate_dir, load_traces, model_path, run_to_dir, trace_path, write_aggregate, ExperimentSummary, AGGREGATE_FILE,
    CONFIG_FILE, REPLICATIONS_FILE,
};
pub use runner::{run_experiment, run_replications, TestSet};
pub use streams::{replication_seed, stream_rng, Stream};
pub use trace::{IterationRecord, RunTrace};
