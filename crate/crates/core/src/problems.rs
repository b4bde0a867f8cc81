//! Synthetic ground-truth problems with Bernoulli responses.
//!
//! New problems implement [`GroundTruth`]; [`problem_by_name`] resolves the
//! names used in experiment configs.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::specfun::norm_cdf;
use crate::surrogate::Bounds;

/// A response-probability function over a box, with a target threshold.
pub trait GroundTruth: Send + Sync {
    fn name(&self) -> &'static str;
    fn bounds(&self) -> Bounds;
    /// Target probability threshold θ.
    fn theta(&self) -> f64;
    /// Probability of a positive response at `x` (unchecked).
    fn response(&self, x: &[f64]) -> f64;
    /// Latent function `f` with `z = Φ(f)`, where the problem defines one.
    fn latent(&self, _x: &[f64]) -> Option<f64> {
        None
    }
    /// Two-alternative forced choice: responses are floored at 0.5.
    fn is_two_afc(&self) -> bool {
        false
    }

    fn dim(&self) -> usize {
        self.bounds().dim()
    }

    /// Probability of a positive response, rejecting points outside the box.
    fn probability(&self, x: &[f64]) -> Result<f64> {
        self.bounds().check(x)?;
        Ok(self.response(x))
    }

    /// One Bernoulli draw at `x`.
    fn sample(&self, x: &[f64], rng: &mut dyn rand::RngCore) -> Result<bool> {
        let p = self.probability(x)?;
        Ok(rng.random::<f64>() < p)
    }
}

const HARTMANN_ALPHA: [f64; 4] = [2.0, 2.2, 2.8, 3.0];
const HARTMANN_A: [[f64; 6]; 4] = [
    [8.0, 3.0, 10.0, 3.5, 1.7, 6.0],
    [0.5, 8.0, 10.0, 1.0, 6.0, 9.0],
    [3.0, 3.5, 1.7, 8.0, 10.0, 6.0],
    [10.0, 6.0, 0.5, 8.0, 1.0, 9.0],
];
const HARTMANN_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];

/// Modified Hartmann-6 function `h(x) = 1 − Σ αᵢ exp(−Σ Aᵢⱼ (xⱼ − Pᵢⱼ)²)`.
pub fn hartmann6(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        let q: f64 = (0..6)
            .map(|j| HARTMANN_A[i][j] * (x[j] - HARTMANN_P[i][j]).powi(2))
            .sum();
        s += HARTMANN_ALPHA[i] * (-q).exp();
    }
    1.0 - s
}

/// Six-dimensional problem with probabilities spanning `(0, 1)`, `θ = 0.5`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Hartmann6Binary;

impl GroundTruth for Hartmann6Binary {
    fn name(&self) -> &'static str {
        "hartmann6_binary"
    }
    fn bounds(&self) -> Bounds {
        Bounds::cube(6, 0.0, 1.0).expect("valid bounds")
    }
    fn theta(&self) -> f64 {
        0.5
    }
    fn latent(&self, x: &[f64]) -> Option<f64> {
        Some(3.0 * hartmann6(x) - 2.0)
    }
    fn response(&self, x: &[f64]) -> f64 {
        norm_cdf(3.0 * hartmann6(x) - 2.0)
    }
}

/// Two-dimensional 2AFC detection problem on `[−1, 1]²`, `θ = 0.75`.
///
/// The latent `f` is nonnegative, so `z = Φ(f)` spans `[0.5, 1]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DiscrimLowDim;

impl DiscrimLowDim {
    pub fn f(x1: f64, x2: f64) -> f64 {
        (1.0 + x2) / (0.05 + 0.4 * x1 * x1 * (0.2 * x1 - 1.0).powi(2))
    }
}

impl GroundTruth for DiscrimLowDim {
    fn name(&self) -> &'static str {
        "discrim_lowdim"
    }
    fn bounds(&self) -> Bounds {
        Bounds::cube(2, -1.0, 1.0).expect("valid bounds")
    }
    fn theta(&self) -> f64 {
        0.75
    }
    fn is_two_afc(&self) -> bool {
        true
    }
    fn latent(&self, x: &[f64]) -> Option<f64> {
        Some(Self::f(x[0], x[1]))
    }
    fn response(&self, x: &[f64]) -> f64 {
        norm_cdf(Self::f(x[0], x[1]))
    }
}

/// Denominators at or below this magnitude use the step-function limit.
pub const DISCRIM_DENOMINATOR_GUARD: f64 = 1e-9;

/// Eight-dimensional 2AFC detection problem on `[−1, 1]⁸`, `θ = 0.75`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DiscrimHighDim;

impl DiscrimHighDim {
    /// The threshold surface `c(x)`.
    pub fn c(x: &[f64]) -> f64 {
        let phase = x[1] * x[7];
        let a = 0.5 * x[2] * (1.0 - (0.6 * PI * phase + x[6]).cos()) + x[3];
        let b = 2.0 - x[5] * (1.0 + (0.3 * PI * phase + x[6]).sin());
        a * b - 1.0
    }
}

impl GroundTruth for DiscrimHighDim {
    fn name(&self) -> &'static str {
        "discrim_highdim"
    }
    fn bounds(&self) -> Bounds {
        Bounds::cube(8, -1.0, 1.0).expect("valid bounds")
    }
    fn theta(&self) -> f64 {
        0.75
    }
    fn is_two_afc(&self) -> bool {
        true
    }
    fn response(&self, x: &[f64]) -> f64 {
        let c = Self::c(x);
        let denom = x[4] * (2.0 + c);
        if denom.abs() <= DISCRIM_DENOMINATOR_GUARD {
            return if x[0] >= c { 1.0 } else { 0.5 };
        }
        0.5 + 0.5 * norm_cdf((x[0] - c) / denom)
    }
}

pub const PROBLEM_NAMES: [&str; 3] = ["hartmann6_binary", "discrim_lowdim", "discrim_highdim"];

pub fn problem_by_name(name: &str) -> Result<Arc<dyn GroundTruth>> {
    match name {
        "hartmann6_binary" => Ok(Arc::new(Hartmann6Binary)),
        "discrim_lowdim" => Ok(Arc::new(DiscrimLowDim)),
        "discrim_highdim" => Ok(Arc::new(DiscrimHighDim)),
        other => Err(Error::config(format!(
            "unknown problem {other:?}; expected one of {}",
            PROBLEM_NAMES.join(", ")
        ))),
    }
}

/// Binarized Hartmann-6 response probability `Φ(3h(x) − 2)`.
pub fn binarized_hartmann6(x: &[f64]) -> Result<f64> {
    Hartmann6Binary.probability(x)
}

/// 2-d discrimination response probability.
pub fn discrim_2d(x: &[f64]) -> Result<f64> {
    DiscrimLowDim.probability(x)
}

/// 8-d discrimination response probability.
pub fn discrim_8d(x: &[f64]) -> Result<f64> {
    DiscrimHighDim.probability(x)
}
