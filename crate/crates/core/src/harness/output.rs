//! Experiment directory layout:
//!
//! - `config.toml`: the config snapshot
//! - `trace_rep{r}.csv`: per-replication records
//! - `model_rep{r}.json`: final model checkpoint of completed replications
//! - `failure_rep{r}.txt`: failure message of a failed replication
//! - `replications.csv`: one summary row per replication
//! - `aggregate.csv`: per-iteration mean and 2·SEM of every metric
//! - `plot_brier.csv`, `plot_classification_error.csv`: `iteration, mean, two_sem`

use std::fs;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::metrics::{aggregate, edge_sample_rate, is_edge_point, AggregateRow, Summary};
use super::runner::run_replications;
use super::trace::RunTrace;
use crate::error::{Error, Result};
use crate::surrogate::Bounds;

pub const CONFIG_FILE: &str = "config.toml";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const REPLICATIONS_FILE: &str = "replications.csv";

pub fn trace_path(dir: &Path, replication: usize) -> PathBuf {
    dir.join(format!("trace_rep{replication}.csv"))
}

pub fn model_path(dir: &Path, replication: usize) -> PathBuf {
    dir.join(format!("model_rep{replication}.json"))
}

fn failure_path(dir: &Path, replication: usize) -> PathBuf {
    dir.join(format!("failure_rep{replication}.txt"))
}

/// Outcome of a multi-replication experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub completed: Vec<usize>,
    /// `(replication, message)` for every replication that did not complete.
    pub failed: Vec<(usize, String)>,
    pub aggregate: Vec<AggregateRow>,
}

impl ExperimentSummary {
    pub fn all_failed(&self) -> bool {
        self.completed.is_empty()
    }
}

/// Runs `replications` replications of `config` on `workers` threads and
/// writes the full output layout to `dir`.
pub fn run_to_dir(
    config: &ExperimentConfig,
    replications: usize,
    workers: usize,
    dir: &Path,
) -> Result<ExperimentSummary> {
    config.validate()?;
    fs::create_dir_all(dir)?;
    let mut snapshot = config.clone();
    snapshot.replications = replications;
    fs::write(dir.join(CONFIG_FILE), snapshot.to_toml_string()?)?;
    let bounds = config.problem()?.bounds();

    let mut traces = Vec::new();
    let mut summary = ExperimentSummary {
        completed: Vec::new(),
        failed: Vec::new(),
        aggregate: Vec::new(),
    };
    for (r, result) in run_replications(config, replications, workers)?.into_iter().enumerate() {
        match result {
            Ok(trace) => {
                write_replication(dir, &trace, &bounds)?;
                match &trace.failure {
                    None => summary.completed.push(r),
                    Some(msg) => summary.failed.push((r, msg.clone())),
                }
                traces.push(trace);
            }
            Err(e) => {
                fs::write(failure_path(dir, r), e.to_string())?;
                summary.failed.push((r, e.to_string()));
            }
        }
    }
    write_replication_table(dir, &traces, &bounds)?;
    summary.aggregate = aggregate(&traces);
    write_aggregate(dir, &summary.aggregate)?;
    Ok(summary)
}

fn write_replication(dir: &Path, trace: &RunTrace, bounds: &Bounds) -> Result<()> {
    let r = trace.replication;
    trace.write_csv(trace_path(dir, r), |x| is_edge_point(x, bounds))?;
    if let Some(model) = &trace.final_model {
        model.save(model_path(dir, r))?;
    }
    if let Some(msg) = &trace.failure {
        fs::write(failure_path(dir, r), msg)?;
    }
    Ok(())
}

fn write_replication_table(dir: &Path, traces: &[RunTrace], bounds: &Bounds) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join(REPLICATIONS_FILE))?;
    w.write_record([
        "replication",
        "status",
        "records",
        "final_brier",
        "final_classification_error",
        "edge_rate",
        "fit_seconds",
        "acquisition_seconds",
    ])?;
    for t in traces {
        let last = t.final_metrics();
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        w.write_record([
            t.replication.to_string(),
            if t.is_complete() { "ok" } else { "failed" }.to_string(),
            t.records.len().to_string(),
            opt(last.and_then(|r| r.brier)),
            opt(last.and_then(|r| r.classification_error)),
            edge_sample_rate(t, bounds).to_string(),
            t.total_fit_seconds().to_string(),
            t.total_acquisition_seconds().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `aggregate.csv` and one plot-data file per metric.
pub fn write_aggregate(dir: &Path, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join(AGGREGATE_FILE))?;
    w.write_record([
        "iteration",
        "n",
        "brier_mean",
        "brier_two_sem",
        "classification_error_mean",
        "classification_error_two_sem",
    ])?;
    for row in rows {
        w.write_record([
            row.iteration.to_string(),
            row.brier.n.to_string(),
            row.brier.mean.to_string(),
            row.brier.two_sem.to_string(),
            row.classification_error.mean.to_string(),
            row.classification_error.two_sem.to_string(),
        ])?;
    }
    w.flush()?;
    type Metric = fn(&AggregateRow) -> Summary;
    let metrics: [(&str, Metric); 2] = [
        ("brier", |r| r.brier),
        ("classification_error", |r| r.classification_error),
    ];
    for (name, get) in metrics {
        let mut w = csv::Writer::from_path(dir.join(format!("plot_{name}.csv")))?;
        w.write_record(["iteration", "mean", "two_sem"])?;
        for row in rows {
            let s = get(row);
            w.write_record([row.iteration.to_string(), s.mean.to_string(), s.two_sem.to_string()])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn replication_of(path: &Path) -> Option<usize> {
    let name = path.file_name()?.to_str()?;
    name.strip_prefix("trace_rep")?.strip_suffix(".csv")?.parse().ok()
}

/// Reads every trace in `dir`, ordered by replication. Model checkpoints are
/// not loaded.
pub fn load_traces(dir: &Path) -> Result<Vec<RunTrace>> {
    let config = ExperimentConfig::load(dir.join(CONFIG_FILE))?;
    let mut found: Vec<(usize, PathBuf)> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter_map(|p| replication_of(&p).map(|r| (r, p)))
        .collect();
    found.sort();
    found
        .into_iter()
        .map(|(r, path)| {
            let failure = fs::read_to_string(failure_path(dir, r)).ok();
            Ok(RunTrace {
                problem: config.problem.clone(),
                acquisition: config.acquisition.clone(),
                replication: r,
                initial_design: config.initial_design,
                records: RunTrace::read_records(&path)?,
                failure,
                final_model: None,
            })
        })
        .collect()
}

/// Recomputes `aggregate.csv` and the plot files from the traces in `dir`.
pub fn aggregate_dir(dir: &Path) -> Result<Vec<AggregateRow>> {
    let traces = load_traces(dir)?;
    if traces.is_empty() {
        return Err(Error::config(format!("no trace files in {}", dir.display())));
    }
    let rows = aggregate(&traces);
    write_aggregate(dir, &rows)?;
    Ok(rows)
}
