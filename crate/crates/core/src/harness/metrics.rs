use serde::{Deserialize, Serialize};

use super::trace::RunTrace;
use crate::error::{Error, Result};
use crate::surrogate::Bounds;

/// Fraction of the per-coordinate range that counts as "near an edge".
pub const EDGE_FRACTION: f64 = 0.05;

fn check_lengths(probs: &[f64], truth: &[bool]) -> Result<()> {
    if probs.len() != truth.len() || probs.is_empty() {
        return Err(Error::domain(format!(
            "metric inputs must be nonempty and equal length ({} vs {})",
            probs.len(),
            truth.len()
        )));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::domain(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Mean squared difference between level-set probabilities and the true
/// indicator `1[z(x) ≤ θ]`.
pub fn brier(level_set_probs: &[f64], truth_below: &[bool]) -> Result<f64> {
    check_lengths(level_set_probs, truth_below)?;
    let s: f64 = level_set_probs
        .iter()
        .zip(truth_below)
        .map(|(p, &t)| (p - indicator(t)).powi(2))
        .sum();
    Ok(s / level_set_probs.len() as f64)
}

/// Mean of `p(1 − y) + (1 − p)y`.
pub fn expected_classification_error(probs: &[f64], truth: &[bool]) -> Result<f64> {
    check_lengths(probs, truth)?;
    let s: f64 = probs
        .iter()
        .zip(truth)
        .map(|(p, &t)| {
            let y = indicator(t);
            p * (1.0 - y) + (1.0 - p) * y
        })
        .sum();
    Ok(s / probs.len() as f64)
}

/// Whether any coordinate of `x` lies within 5% of its range of either bound.
pub fn is_edge_point(x: &[f64], bounds: &Bounds) -> bool {
    x.iter().enumerate().any(|(k, &v)| {
        let margin = EDGE_FRACTION * bounds.range(k);
        v - bounds.lower()[k] <= margin || bounds.upper()[k] - v <= margin
    })
}

/// Fraction of active-sampling points that are edge points; 0 when there are none.
pub fn edge_sample_rate(trace: &RunTrace, bounds: &Bounds) -> f64 {
    let active: Vec<_> = trace.records.iter().filter(|r| r.active).collect();
    if active.is_empty() {
        return 0.0;
    }
    let edges = active.iter().filter(|r| is_edge_point(&r.point, bounds)).count();
    edges as f64 / active.len() as f64
}

/// Mean and two standard errors of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub two_sem: f64,
}

impl Summary {
    /// Sorts before summing, so the result does not depend on input order.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let mean = v.iter().sum::<f64>() / n as f64;
        let two_sem = if n < 2 {
            0.0
        } else {
            let mut dev: Vec<f64> = v.iter().map(|x| (x - mean).powi(2)).collect();
            dev.sort_by(f64::total_cmp);
            let var = dev.iter().sum::<f64>() / (n - 1) as f64;
            2.0 * (var / n as f64).sqrt()
        };
        Some(Self { n, mean, two_sem })
    }
}

/// Cross-replication summary at one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub iteration: usize,
    pub brier: Summary,
    pub classification_error: Summary,
}

/// Per-iteration mean and 2·SEM of each metric over the traces that have it.
pub fn aggregate(traces: &[RunTrace]) -> Vec<AggregateRow> {
    let last = traces.iter().flat_map(|t| t.records.iter().map(|r| r.iteration)).max();
    let Some(last) = last else {
        return Vec::new();
    };
    let mut rows = Vec::new();
    for it in 1..=last {
        let mut b = Vec::new();
        let mut c = Vec::new();
        for t in traces {
            if let Some(r) = t.records.iter().find(|r| r.iteration == it) {
                b.extend(r.brier);
                c.extend(r.classification_error);
            }
        }
        if let (Some(brier), Some(classification_error)) = (Summary::of(&b), Summary::of(&c)) {
            rows.push(AggregateRow {
                iteration: it,
                brier,
                classification_error,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::trace::IterationRecord;

    fn record(iteration: usize, point: Vec<f64>, active: bool, brier: Option<f64>) -> IterationRecord {
        IterationRecord {
            iteration,
            point,
            outcome: false,
            active,
            brier,
            classification_error: brier,
            acquisition_value: None,
            fit_seconds: 0.0,
            acquisition_seconds: 0.0,
        }
    }

    fn trace(records: Vec<IterationRecord>) -> RunTrace {
        RunTrace {
            problem: "p".into(),
            acquisition: "a".into(),
            replication: 0,
            initial_design: 0,
            records,
            failure: None,
            final_model: None,
        }
    }

    #[test]
    fn brier_examples() {
        assert_eq!(brier(&[1.0, 0.0], &[true, false]).unwrap(), 0.0);
        assert_eq!(brier(&[0.5; 4], &[true, false, true, true]).unwrap(), 0.25);
        let b = brier(&[0.8, 0.3, 0.5], &[true, false, true]).unwrap();
        assert!((b - 0.38 / 3.0).abs() < 1e-15);
        assert!(brier(&[0.5], &[true, false]).is_err());
        assert!(brier(&[1.5], &[true]).is_err());
    }

    #[test]
    fn classification_error_examples() {
        assert_eq!(expected_classification_error(&[1.0, 0.0], &[true, false]).unwrap(), 0.0);
        assert_eq!(
            expected_classification_error(&[0.5; 3], &[true, false, false]).unwrap(),
            0.5
        );
        let e = expected_classification_error(&[0.8, 0.3, 0.5], &[true, false, true]).unwrap();
        assert!((e - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn edge_rate_examples() {
        let bounds = Bounds::cube(2, -1.0, 1.0).unwrap();
        let center = trace((1..=3).map(|i| record(i, vec![0.0, 0.0], true, None)).collect());
        assert_eq!(edge_sample_rate(&center, &bounds), 0.0);
        let face = trace((1..=3).map(|i| record(i, vec![0.3, 1.0], true, None)).collect());
        assert_eq!(edge_sample_rate(&face, &bounds), 1.0);
        let mixed = trace(vec![
            record(1, vec![1.0, 1.0], false, None),
            record(2, vec![0.0, 0.5], true, None),
            record(3, vec![-0.95, 0.2], true, None),
            record(4, vec![0.89, -0.89], true, None),
            record(5, vec![0.1, 0.1], true, None),
        ]);
        assert_eq!(edge_sample_rate(&mixed, &bounds), 0.25);
        assert_eq!(edge_sample_rate(&trace(vec![]), &bounds), 0.0);
    }

    #[test]
    fn aggregate_examples() {
        let a = trace(vec![
            record(1, vec![0.0], false, None),
            record(2, vec![0.0], true, Some(0.2)),
        ]);
        let b = trace(vec![
            record(1, vec![0.0], false, None),
            record(2, vec![0.0], true, Some(0.4)),
        ]);
        let rows = aggregate(&[a.clone(), b.clone()]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].iteration, 2);
        assert!((rows[0].brier.mean - 0.3).abs() < 1e-15);
        assert!((rows[0].brier.two_sem - 0.2).abs() < 1e-15);
        assert_eq!(aggregate(std::slice::from_ref(&a))[0].brier.two_sem, 0.0);
        assert_eq!(aggregate(&[a.clone(), a.clone()])[0].brier.two_sem, 0.0);
        assert_eq!(aggregate(&[a.clone(), b.clone()]), aggregate(&[b, a]));
    }

    #[test]
    fn summary_is_order_invariant() {
        let v = [0.1, 0.7, 1e-17, 0.3, 0.2];
        let mut w = v;
        w.reverse();
        assert_eq!(Summary::of(&v), Summary::of(&w));
        assert_eq!(Summary::of(&[]), None);
    }
}
