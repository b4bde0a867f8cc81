//! Versioned JSON serialization of fitted models.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::kernel::KernelParams;
use super::model::{FitDiagnostics, GpModel};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "bernoulli-lse/gp-model";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Self-describing snapshot of a [`GpModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCheckpoint {
    pub format: String,
    pub version: u32,
    pub kernel: KernelParams,
    pub inducing_points: Vec<Vec<f64>>,
    pub variational_mean: Vec<f64>,
    /// Row-major.
    pub variational_cov: Vec<Vec<f64>>,
    pub jitter: f64,
    pub diagnostics: FitDiagnostics,
    pub data: Dataset,
}

impl GpModel {
    pub fn to_checkpoint(&self) -> ModelCheckpoint {
        let cov = self.variational_cov();
        ModelCheckpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            kernel: self.kernel().clone(),
            inducing_points: self.inducing_points().to_vec(),
            variational_mean: self.variational_mean().iter().copied().collect(),
            variational_cov: cov.row_iter().map(|r| r.iter().copied().collect()).collect(),
            jitter: self.jitter(),
            diagnostics: self.diagnostics().clone(),
            data: self.data().clone(),
        }
    }

    pub fn from_checkpoint(ckpt: ModelCheckpoint) -> Result<Self> {
        if ckpt.format != CHECKPOINT_FORMAT {
            return Err(Error::Serialization(format!(
                "unknown checkpoint format {:?}",
                ckpt.format
            )));
        }
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Serialization(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                ckpt.version
            )));
        }
        let m = ckpt.variational_mean.len();
        if ckpt.variational_cov.len() != m || ckpt.variational_cov.iter().any(|r| r.len() != m) {
            return Err(Error::Serialization(
                "variational covariance has the wrong shape".into(),
            ));
        }
        let cov = DMatrix::from_fn(m, m, |i, j| ckpt.variational_cov[i][j]);
        GpModel::assemble(
            ckpt.kernel,
            ckpt.inducing_points,
            DVector::from_vec(ckpt.variational_mean),
            cov,
            ckpt.jitter,
            ckpt.data,
            ckpt.diagnostics,
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_checkpoint())?;
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_checkpoint(serde_json::from_str(&text)?)
    }
}
