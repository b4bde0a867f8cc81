use std::path::Path;

use crate::error::{Error, Result};
use crate::surrogate::GpModel;

/// One observation of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based observation index.
    pub iteration: usize,
    pub point: Vec<f64>,
    pub outcome: bool,
    /// Chosen by the acquisition strategy rather than the initial design.
    pub active: bool,
    /// Metrics of the model fitted after this observation, when computed.
    pub brier: Option<f64>,
    pub classification_error: Option<f64>,
    pub acquisition_value: Option<f64>,
    pub fit_seconds: f64,
    pub acquisition_seconds: f64,
}

/// Result of one replication.
///
/// A completed run has one record per iteration; a failed run is truncated
/// and carries the failure message.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub problem: String,
    pub acquisition: String,
    pub replication: usize,
    pub initial_design: usize,
    pub records: Vec<IterationRecord>,
    pub failure: Option<String>,
    pub final_model: Option<GpModel>,
}

impl RunTrace {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    /// Last record carrying metrics.
    pub fn final_metrics(&self) -> Option<&IterationRecord> {
        self.records.iter().rev().find(|r| r.brier.is_some())
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.records.iter().map(|r| r.point.clone()).collect()
    }

    pub fn total_fit_seconds(&self) -> f64 {
        self.records.iter().map(|r| r.fit_seconds).sum()
    }

    pub fn total_acquisition_seconds(&self) -> f64 {
        self.records.iter().map(|r| r.acquisition_seconds).sum()
    }

    /// Writes the records as CSV with columns
    /// `iteration, active, outcome, brier, classification_error, edge,
    /// acquisition_value, fit_seconds, acquisition_seconds, x1..xd`.
    /// Missing values are empty fields.
    pub fn write_csv(&self, path: impl AsRef<Path>, edge: impl Fn(&[f64]) -> bool) -> Result<()> {
        let dim = self.records.first().map_or(0, |r| r.point.len());
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = TRACE_COLUMNS.iter().map(|s| s.to_string()).collect();
        header.extend((1..=dim).map(|k| format!("x{k}")));
        w.write_record(&header)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.records {
            let mut row = vec![
                r.iteration.to_string(),
                u8::from(r.active).to_string(),
                u8::from(r.outcome).to_string(),
                opt(r.brier),
                opt(r.classification_error),
                if r.active {
                    u8::from(edge(&r.point)).to_string()
                } else {
                    String::new()
                },
                opt(r.acquisition_value),
                r.fit_seconds.to_string(),
                r.acquisition_seconds.to_string(),
            ];
            row.extend(r.point.iter().map(|x| x.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads records written by [`RunTrace::write_csv`].
    pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<IterationRecord>> {
        let path = path.as_ref();
        let mut rdr = csv::Reader::from_path(path)?;
        let header = rdr.headers()?.clone();
        if header.len() < TRACE_COLUMNS.len() || header.iter().zip(TRACE_COLUMNS).any(|(a, b)| a != b) {
            return Err(Error::Serialization(format!("{} is not a trace file", path.display())));
        }
        let bad = |what: &str, row: usize| Error::Serialization(format!("{}: bad {what} in row {row}", path.display()));
        let mut out = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let num = |k: usize| -> Result<f64> { rec[k].parse::<f64>().map_err(|_| bad(TRACE_COLUMNS[k], i + 1)) };
            let opt = |k: usize| -> Result<Option<f64>> {
                if rec[k].is_empty() {
                    Ok(None)
                } else {
                    num(k).map(Some)
                }
            };
            let flag = |k: usize| -> Result<bool> {
                match &rec[k] {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    _ => Err(bad(TRACE_COLUMNS[k], i + 1)),
                }
            };
            let point = (TRACE_COLUMNS.len()..rec.len())
                .map(|k| rec[k].parse::<f64>().map_err(|_| bad("coordinate", i + 1)))
                .collect::<Result<Vec<f64>>>()?;
            out.push(IterationRecord {
                iteration: rec[0].parse().map_err(|_| bad("iteration", i + 1))?,
                active: flag(1)?,
                outcome: flag(2)?,
                brier: opt(3)?,
                classification_error: opt(4)?,
                acquisition_value: opt(6)?,
                fit_seconds: num(7)?,
                acquisition_seconds: num(8)?,
                point,
            });
        }
        Ok(out)
    }
}

const TRACE_COLUMNS: [&str; 9] = [
    "iteration",
    "active",
    "outcome",
    "brier",
    "classification_error",
    "edge",
    "acquisition_value",
    "fit_seconds",
    "acquisition_seconds",
];
