use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ARD squared-exponential kernel `k(x, x') = s · exp(-½ Σ (xᵢ − x'ᵢ)² / ℓᵢ²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub lengthscales: Vec<f64>,
    /// Signal variance `s`.
    pub outputscale: f64,
}

impl KernelParams {
    pub fn new(lengthscales: Vec<f64>, outputscale: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if lengthscales.is_empty() || !lengthscales.iter().all(|&l| ok(l)) || !ok(outputscale) {
            return Err(Error::domain(format!(
                "kernel parameters must be finite and positive: {lengthscales:?}, {outputscale}"
            )));
        }
        Ok(Self {
            lengthscales,
            outputscale,
        })
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut r2 = 0.0;
        for ((a, b), l) in x.iter().zip(y).zip(&self.lengthscales) {
            let t = (a - b) / l;
            r2 += t * t;
        }
        self.outputscale * (-0.5 * r2).exp()
    }

    /// Cross-covariance matrix between two point sets.
    pub fn matrix(&self, rows: &[Vec<f64>], cols: &[Vec<f64>]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| self.eval(&rows[i], &cols[j]))
    }

    pub fn column(&self, rows: &[Vec<f64>], x: &[f64]) -> nalgebra::DVector<f64> {
        nalgebra::DVector::from_iterator(rows.len(), rows.iter().map(|r| self.eval(r, x)))
    }
}
