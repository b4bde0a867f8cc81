//! Probit classification GP with inducing-point variational inference.

mod checkpoint;
mod dataset;
mod fit;
mod kernel;
mod kmeans;
mod model;

pub use checkpoint::{ModelCheckpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use dataset::{Bounds, Dataset};
pub use fit::{
    evaluate_objective, fit, refit_policy, select_inducing, RefitMode, SurrogateConfig, DEFAULT_REFIT_INTERVAL,
};
pub use kernel::KernelParams;
pub use kmeans::kmeans;
pub use model::{CandidateMoments, FitDiagnostics, GpModel, PosteriorQuery, PreparedReference, VARIANCE_FLOOR};
