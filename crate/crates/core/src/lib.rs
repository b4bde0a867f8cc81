//! Active level-set estimation with binary observations.
//!
//! A probit Gaussian-process classifier supplies latent posteriors; the
//! [`lookahead`] module turns them into closed-form posteriors of the
//! sublevel event after one more observation, and [`acquisition`] composes
//! those into the selection criteria. [`harness`] runs replicated benchmarks
//! on the [`problems`].

pub mod acquisition;
pub mod error;
pub mod harness;
pub mod lookahead;
pub mod optim;
pub mod oracle;
pub mod problems;
pub mod specfun;
pub mod surrogate;

pub use acquisition::{Acquisition, AcquisitionKind, ReferenceSet};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, RunTrace};
pub use lookahead::{LookaheadPosteriors, LookaheadTerms, QueryPair};
pub use problems::{problem_by_name, GroundTruth};
pub use surrogate::{fit, Bounds, Dataset, GpModel, SurrogateConfig};
