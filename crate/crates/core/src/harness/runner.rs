use std::time::Instant;

use log::{info, warn};
use rand::{Rng, RngCore};
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::metrics::{brier, expected_classification_error};
use super::streams::{stream_rng, Stream};
use super::trace::{IterationRecord, RunTrace};
use crate::acquisition::ReferenceSet;
use crate::error::{Error, Result};
use crate::optim::{select_next, SobolStream};
use crate::problems::GroundTruth;
use crate::specfun::norm_ppf;
use crate::surrogate::{fit, refit_policy, Bounds, Dataset, GpModel, RefitMode};

/// Held-out points with their true level-set membership `z(x) ≤ θ`.
#[derive(Debug, Clone)]
pub struct TestSet {
    pub points: Vec<Vec<f64>>,
    pub truth_below: Vec<bool>,
}

impl TestSet {
    /// `n` uniform points in the problem's box.
    pub fn draw(problem: &dyn GroundTruth, theta: f64, n: usize, rng: &mut dyn RngCore) -> Self {
        let bounds = problem.bounds();
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let u: Vec<f64> = (0..bounds.dim()).map(|_| rng.random::<f64>()).collect();
                bounds.from_unit(&u)
            })
            .collect();
        let truth_below = points.iter().map(|x| problem.response(x) <= theta).collect();
        Self { points, truth_below }
    }

    /// Brier score and expected classification error of `model`.
    pub fn evaluate(&self, model: &GpModel, gamma: f64) -> Result<(f64, f64)> {
        let probs = model.level_set_probabilities(&self.points, gamma)?;
        Ok((
            brier(&probs, &self.truth_below)?,
            expected_classification_error(&probs, &self.truth_below)?,
        ))
    }
}

fn design_point(bounds: &Bounds, u: &[f64]) -> Vec<f64> {
    let mut x = bounds.from_unit(u);
    bounds.project(&mut x);
    x
}

/// Runs replication `replication` of `config`.
///
/// Invalid configs are errors. Numeric failures inside the loop (fit,
/// maximization, metrics) end the run early: the returned trace is truncated
/// and carries the failure message.
pub fn run_experiment(config: &ExperimentConfig, replication: usize) -> Result<RunTrace> {
    config.validate()?;
    let problem = config.problem()?;
    let kind = config.acquisition_kind()?;
    let theta = config.theta()?;
    let gamma = norm_ppf(theta)?;
    let bounds = problem.bounds();
    let rng = |s| stream_rng(config.seed, replication, s);

    let mut design = SobolStream::scrambled(bounds.dim(), rng(Stream::InitialDesign).random())?;
    let mut outcomes = rng(Stream::Outcomes);
    let mut fit_rng = rng(Stream::Fit);
    let mut candidates = rng(Stream::Candidates);
    let test = TestSet::draw(problem.as_ref(), theta, config.test_set_size, &mut rng(Stream::TestSet));
    let refset = if kind.uses_reference_set() {
        let unit =
            SobolStream::scrambled(bounds.dim(), rng(Stream::ReferenceSet).random())?.draw(config.reference_set_size);
        Some(ReferenceSet::from_unit(&unit, &bounds)?)
    } else {
        None
    };

    let mut trace = RunTrace {
        problem: config.problem.clone(),
        acquisition: kind.to_string(),
        replication,
        initial_design: config.initial_design,
        records: Vec::with_capacity(config.iterations),
        failure: None,
        final_model: None,
    };
    let mut data = Dataset::new(bounds.clone());
    for i in 1..=config.initial_design {
        let x = design_point(&bounds, &design.next_point());
        let y = problem.sample(&x, &mut outcomes)?;
        data.push(x.clone(), y)?;
        trace.records.push(IterationRecord {
            iteration: i,
            point: x,
            outcome: y,
            active: false,
            brier: None,
            classification_error: None,
            acquisition_value: None,
            fit_seconds: 0.0,
            acquisition_seconds: 0.0,
        });
    }

    let fail = |trace: &mut RunTrace, stage: &str, e: Error| {
        let msg = format!("{stage} failed at iteration {}: {e}", trace.records.len());
        warn!("replication {replication}: {msg}");
        trace.failure = Some(msg);
    };

    let start = Instant::now();
    let mut model = match fit(&data, &config.surrogate, None, &mut fit_rng) {
        Ok(m) => m,
        Err(e) => {
            fail(&mut trace, "initial fit", e);
            return Ok(trace);
        }
    };
    let last = trace.records.last_mut().expect("initial design is nonempty");
    last.fit_seconds = start.elapsed().as_secs_f64();
    match test.evaluate(&model, gamma) {
        Ok((b, c)) => {
            last.brier = Some(b);
            last.classification_error = Some(c);
        }
        Err(e) => {
            fail(&mut trace, "metrics", e);
            return Ok(trace);
        }
    }

    for iteration in config.initial_design + 1..=config.iterations {
        let active_index = iteration - config.initial_design;
        let seed = candidates.random::<u64>();
        let start = Instant::now();
        let chosen = select_next(
            kind,
            &model,
            refset.as_ref(),
            theta,
            &config.optimizer,
            seed,
            &mut design,
        );
        let acquisition_seconds = start.elapsed().as_secs_f64();
        let chosen = match chosen {
            Ok(c) => c,
            Err(e) => {
                fail(&mut trace, "acquisition", e);
                return Ok(trace);
            }
        };
        let y = problem.sample(&chosen.point, &mut outcomes)?;
        data.push(chosen.point.clone(), y)?;
        trace.records.push(IterationRecord {
            iteration,
            point: chosen.point,
            outcome: y,
            active: true,
            brier: None,
            classification_error: None,
            acquisition_value: (chosen.evaluations > 0).then_some(chosen.value),
            fit_seconds: 0.0,
            acquisition_seconds,
        });

        let warm = match refit_policy(active_index, config.refit_interval) {
            RefitMode::Warm => Some(&model),
            RefitMode::FromScratch => None,
        };
        let start = Instant::now();
        let refit = fit(&data, &config.surrogate, warm, &mut fit_rng);
        let fit_seconds = start.elapsed().as_secs_f64();
        trace.records.last_mut().expect("just pushed").fit_seconds = fit_seconds;
        model = match refit {
            Ok(m) => m,
            Err(e) => {
                fail(&mut trace, "fit", e);
                return Ok(trace);
            }
        };
        match test.evaluate(&model, gamma) {
            Ok((b, c)) => {
                let r = trace.records.last_mut().expect("just pushed");
                r.brier = Some(b);
                r.classification_error = Some(c);
            }
            Err(e) => {
                fail(&mut trace, "metrics", e);
                return Ok(trace);
            }
        }
    }
    info!(
        "replication {replication} done: {} iterations, final Brier {:?}",
        trace.records.len(),
        trace.final_metrics().and_then(|r| r.brier)
    );
    trace.final_model = Some(model);
    Ok(trace)
}

/// Runs `replications` replications on a pool of `workers` threads. Results
/// are in replication order regardless of scheduling.
pub fn run_replications(
    config: &ExperimentConfig,
    replications: usize,
    workers: usize,
) -> Result<Vec<Result<RunTrace>>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        (0..replications)
            .into_par_iter()
            .map(|r| run_experiment(config, r))
            .collect()
    }))
}
