//! Quasi-random sequences and acquisition maximization.

mod maximize;
mod sobol;

pub use maximize::{maximize, Maximum, OptimizerBudget};
pub use sobol::{SobolStream, MAX_DIM};

use crate::acquisition::{Acquisition, AcquisitionKind, ReferenceSet};
use crate::error::Result;
use crate::surrogate::GpModel;

/// Chooses the next point for `kind`.
///
/// `QuasiRandom` takes the next point of `quasi` without touching the model;
/// every other strategy is maximized over the model's bounds with the raw
/// candidates scrambled by `seed`.
pub fn select_next(
    kind: AcquisitionKind,
    model: &GpModel,
    refset: Option<&ReferenceSet>,
    theta: f64,
    budget: &OptimizerBudget,
    seed: u64,
    quasi: &mut SobolStream,
) -> Result<Maximum> {
    let bounds = model.bounds();
    if kind == AcquisitionKind::QuasiRandom {
        let mut point = bounds.from_unit(&quasi.next_point());
        bounds.project(&mut point);
        return Ok(Maximum {
            point,
            value: 0.0,
            raw_best: 0.0,
            evaluations: 0,
        });
    }
    let acq = Acquisition::new(kind, model, refset, theta)?;
    maximize(|x| acq.evaluate(x), bounds, budget, seed)
}
