use log::debug;
use serde::{Deserialize, Serialize};

use super::sobol::SobolStream;
use crate::error::{Error, Result};
use crate::surrogate::Bounds;

/// Multistart budget for [`maximize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerBudget {
    /// Scrambled-Sobol candidates scored before refinement.
    pub raw_samples: usize,
    /// Best raw candidates refined by gradient ascent.
    pub restarts: usize,
    pub max_iterations: usize,
    /// Finite-difference step as a fraction of each coordinate's range.
    pub fd_step: f64,
    /// First line-search step, as a fraction of the box diagonal scale.
    pub initial_step: f64,
    /// Refinement stops once the line-search step falls below this.
    pub min_step: f64,
    /// Refinement also stops after an accepted step improving the value by
    /// less than `rel_tolerance · |value|`.
    pub rel_tolerance: f64,
}

impl Default for OptimizerBudget {
    fn default() -> Self {
        Self {
            raw_samples: 512,
            restarts: 8,
            max_iterations: 32,
            fd_step: 1e-4,
            initial_step: 0.1,
            min_step: 1e-6,
            rel_tolerance: 1e-7,
        }
    }
}

impl OptimizerBudget {
    pub fn validate(&self) -> Result<()> {
        if self.raw_samples == 0 || self.restarts == 0 {
            return Err(Error::config("optimizer needs at least one raw sample and one restart"));
        }
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(pos(self.fd_step) && self.fd_step < 0.5 && pos(self.initial_step) && pos(self.min_step))
            || !(self.rel_tolerance >= 0.0 && self.rel_tolerance.is_finite())
        {
            return Err(Error::config("optimizer steps must be positive and finite"));
        }
        Ok(())
    }
}

/// Result of a maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct Maximum {
    pub point: Vec<f64>,
    pub value: f64,
    /// Best value among the raw candidates.
    pub raw_best: f64,
    pub evaluations: usize,
}

struct Counted<'f, F> {
    f: &'f F,
    bounds: &'f Bounds,
    evaluations: usize,
    failures: usize,
    first_failure: Option<String>,
}

impl<F: Fn(&[f64]) -> Result<f64>> Counted<'_, F> {
    /// Value at unit-cube point `u`; failures and non-finite values score `−∞`.
    fn eval(&mut self, u: &[f64]) -> f64 {
        self.evaluations += 1;
        let mut x = self.bounds.from_unit(u);
        self.bounds.project(&mut x);
        match (self.f)(&x) {
            Ok(v) if v.is_finite() => v,
            Ok(v) => {
                self.fail(format!("non-finite value {v} at {x:?}"));
                f64::NEG_INFINITY
            }
            Err(e) => {
                self.fail(format!("{e} at {x:?}"));
                f64::NEG_INFINITY
            }
        }
    }

    fn fail(&mut self, msg: String) {
        self.failures += 1;
        if self.first_failure.is_none() {
            self.first_failure = Some(msg);
        }
    }
}

fn project_unit(u: &mut [f64]) {
    for v in u.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

fn gradient<F: Fn(&[f64]) -> Result<f64>>(f: &mut Counted<F>, u: &[f64], fu: f64, h: f64) -> Vec<f64> {
    let mut g = vec![0.0; u.len()];
    let mut probe = u.to_vec();
    for k in 0..u.len() {
        let up = (u[k] + h).min(1.0);
        let dn = (u[k] - h).max(0.0);
        probe[k] = up;
        let f_up = if up > u[k] { f.eval(&probe) } else { fu };
        probe[k] = dn;
        let f_dn = if dn < u[k] { f.eval(&probe) } else { fu };
        probe[k] = u[k];
        let width = up - dn;
        let d = (f_up - f_dn) / width;
        g[k] = if d.is_finite() { d } else { 0.0 };
    }
    g
}

/// Projected gradient ascent with a backtracking step from `start`.
fn refine<F: Fn(&[f64]) -> Result<f64>>(
    f: &mut Counted<F>,
    start: Vec<f64>,
    value: f64,
    budget: &OptimizerBudget,
) -> (Vec<f64>, f64) {
    let mut u = start;
    let mut fu = value;
    let mut step = budget.initial_step;
    for _ in 0..budget.max_iterations {
        let g = gradient(f, &u, fu, budget.fd_step);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            break;
        }
        let mut improved = false;
        while step >= budget.min_step {
            let mut cand: Vec<f64> = u.iter().zip(&g).map(|(x, gk)| x + step * gk / norm).collect();
            project_unit(&mut cand);
            if cand == u {
                break;
            }
            let fc = f.eval(&cand);
            if fc > fu {
                improved = fc - fu > budget.rel_tolerance * fu.abs();
                u = cand;
                fu = fc;
                step = (step * 1.5).min(1.0);
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (u, fu)
}

/// Maximizes `f` over `bounds`: scores `raw_samples` scrambled-Sobol points
/// (scramble seeded by `seed`), refines the best `restarts` by projected
/// finite-difference gradient ascent, and returns the best point found.
///
/// The returned value is never below the best raw candidate.
pub fn maximize<F>(f: F, bounds: &Bounds, budget: &OptimizerBudget, seed: u64) -> Result<Maximum>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    budget.validate()?;
    let mut counted = Counted {
        f: &f,
        bounds,
        evaluations: 0,
        failures: 0,
        first_failure: None,
    };
    let raw = SobolStream::scrambled(bounds.dim(), seed)?.draw(budget.raw_samples);
    let values: Vec<f64> = raw.iter().map(|u| counted.eval(u)).collect();
    let mut order: Vec<usize> = (0..raw.len()).filter(|&i| values[i].is_finite()).collect();
    if order.is_empty() {
        return Err(Error::Optimization(format!(
            "all {} raw candidates failed; first failure: {}",
            raw.len(),
            counted.first_failure.unwrap_or_default()
        )));
    }
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let raw_best = values[order[0]];
    let mut best = (raw[order[0]].clone(), raw_best);
    for &i in order.iter().take(budget.restarts) {
        let (u, fu) = refine(&mut counted, raw[i].clone(), values[i], budget);
        if fu > best.1 {
            best = (u, fu);
        }
    }
    if counted.failures > 0 {
        debug!(
            "maximize: {} of {} evaluations failed; first: {}",
            counted.failures,
            counted.evaluations,
            counted.first_failure.as_deref().unwrap_or("")
        );
    }
    let mut point = bounds.from_unit(&best.0);
    bounds.project(&mut point);
    Ok(Maximum {
        point,
        value: best.1,
        raw_best,
        evaluations: counted.evaluations,
    })
}
