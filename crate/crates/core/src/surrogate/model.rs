use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::dataset::{Bounds, Dataset};
use super::kernel::KernelParams;
use crate::error::{Error, Result};
use crate::specfun::norm_cdf;

/// Summary of the optimization that produced a model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub elbo: f64,
    /// ELBO plus log hyperprior density, the quantity actually maximized.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub from_scratch: bool,
}

/// Marginal moments of the latent function at query points, with their
/// covariances against one candidate point.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorQuery {
    pub mu_q: Vec<f64>,
    pub var_q: Vec<f64>,
    pub mu_star: f64,
    pub var_star: f64,
    pub cov_qstar: Vec<f64>,
}

impl PosteriorQuery {
    pub fn len(&self) -> usize {
        self.mu_q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu_q.is_empty()
    }
}

/// Sparse variational probit GP with whitened inducing variables.
///
/// With `L Lᵀ = K_zz` and `u = L v`, the variational family is
/// `q(v) = N(m, S)`, so for any `x` with `a(x) = L⁻¹ k_z(x)`:
/// `E f(x) = a(x)ᵀ m` and `Cov(f(x), f(x')) = k(x, x') + a(x)ᵀ (S − I) a(x')`.
#[derive(Debug, Clone)]
pub struct GpModel {
    kernel: KernelParams,
    inducing: Vec<Vec<f64>>,
    q_mean: DVector<f64>,
    q_cov: DMatrix<f64>,
    jitter: f64,
    data: Dataset,
    diagnostics: FitDiagnostics,
    chol: DMatrix<f64>,
    s_minus_i: DMatrix<f64>,
}

/// Smallest variance reported for any point.
pub const VARIANCE_FLOOR: f64 = 1e-12;

impl GpModel {
    /// Builds a model from its variational state, validating shapes and
    /// positive-definiteness.
    pub fn assemble(
        kernel: KernelParams,
        inducing: Vec<Vec<f64>>,
        q_mean: DVector<f64>,
        q_cov: DMatrix<f64>,
        jitter: f64,
        data: Dataset,
        diagnostics: FitDiagnostics,
    ) -> Result<Self> {
        let m = inducing.len();
        let d = data.dim();
        if m == 0 {
            return Err(Error::domain("model needs at least one inducing point"));
        }
        if kernel.dim() != d || inducing.iter().any(|z| z.len() != d) {
            return Err(Error::domain("kernel, inducing points and data disagree on dimension"));
        }
        if q_mean.len() != m || q_cov.nrows() != m || q_cov.ncols() != m {
            return Err(Error::domain("variational parameters do not match inducing count"));
        }
        if !(jitter.is_finite() && jitter >= 0.0) {
            return Err(Error::domain(format!("invalid jitter {jitter}")));
        }
        if q_mean.iter().chain(q_cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::domain("variational parameters are not finite"));
        }
        let asym = (&q_cov - q_cov.transpose()).abs().max();
        if asym > 1e-8 * (1.0 + q_cov.abs().max()) {
            return Err(Error::domain("variational covariance is not symmetric"));
        }
        if q_cov.clone().cholesky().is_none() {
            return Err(Error::domain("variational covariance is not positive definite"));
        }
        let mut kzz = kernel.matrix(&inducing, &inducing);
        for i in 0..m {
            kzz[(i, i)] += jitter;
        }
        let chol = kzz
            .cholesky()
            .ok_or_else(|| Error::domain(format!("inducing covariance not positive definite at jitter {jitter}")))?
            .unpack();
        let s_minus_i = &q_cov - DMatrix::identity(m, m);
        Ok(Self {
            kernel,
            inducing,
            q_mean,
            q_cov,
            jitter,
            data,
            diagnostics,
            chol,
            s_minus_i,
        })
    }

    /// The GP prior (`m = 0`, `S = I`) expressed on the given inducing points.
    pub fn prior(data: Dataset, kernel: KernelParams, inducing: Vec<Vec<f64>>, jitter: f64) -> Result<Self> {
        let m = inducing.len();
        Self::assemble(
            kernel,
            inducing,
            DVector::zeros(m),
            DMatrix::identity(m, m),
            jitter,
            data,
            FitDiagnostics::default(),
        )
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    pub fn inducing_points(&self) -> &[Vec<f64>] {
        &self.inducing
    }

    pub fn num_inducing(&self) -> usize {
        self.inducing.len()
    }

    pub fn variational_mean(&self) -> &DVector<f64> {
        &self.q_mean
    }

    pub fn variational_cov(&self) -> &DMatrix<f64> {
        &self.q_cov
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn bounds(&self) -> &Bounds {
        self.data.bounds()
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    pub fn diagnostics(&self) -> &FitDiagnostics {
        &self.diagnostics
    }

    pub fn elbo(&self) -> f64 {
        self.diagnostics.elbo
    }

    /// Whitened projections `L⁻¹ K_z,X` for a set of points (one column each).
    fn project(&self, points: &[Vec<f64>]) -> DMatrix<f64> {
        let mut a = self.kernel.matrix(&self.inducing, points);
        self.chol.solve_lower_triangular_mut(&mut a);
        a
    }

    fn check_points(&self, points: &[Vec<f64>]) -> Result<()> {
        points.iter().try_for_each(|p| self.bounds().check(p))
    }

    /// Marginal mean and variance of `f` at each point.
    pub fn latent(&self, points: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_points(points)?;
        let a = self.project(points);
        Ok(self.moments_from_projection(&a))
    }

    fn moments_from_projection(&self, a: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
        let mean = a.tr_mul(&self.q_mean);
        let wa = &self.s_minus_i * a;
        let var = (0..a.ncols())
            .map(|j| (self.kernel.outputscale + a.column(j).dot(&wa.column(j))).max(VARIANCE_FLOOR))
            .collect();
        (mean.iter().copied().collect(), var)
    }

    /// Joint posterior summary for query points against a candidate.
    pub fn posterior(&self, query_points: &[Vec<f64>], candidate: &[f64]) -> Result<PosteriorQuery> {
        self.check_points(query_points)?;
        self.bounds().check(candidate)?;
        let reference = self.prepare(query_points)?;
        let cand = self.candidate(candidate)?;
        let cov_qstar = reference.cross_covariance(self, &cand);
        Ok(PosteriorQuery {
            mu_q: reference.mean.clone(),
            var_q: reference.var.clone(),
            mu_star: cand.mean,
            var_star: cand.var,
            cov_qstar,
        })
    }

    /// Caches the projections of a fixed point set so that covariances
    /// against many candidates cost `O(m |G|)` each.
    pub fn prepare(&self, points: &[Vec<f64>]) -> Result<PreparedReference> {
        self.check_points(points)?;
        let a = self.project(points);
        let (mean, var) = self.moments_from_projection(&a);
        Ok(PreparedReference {
            points: points.to_vec(),
            a,
            mean,
            var,
        })
    }

    /// Moments at a single candidate, plus the vector `(S − I) a(x)` used for
    /// cross-covariances.
    pub fn candidate(&self, x: &[f64]) -> Result<CandidateMoments> {
        self.bounds().check(x)?;
        let mut a = self.kernel.column(&self.inducing, x);
        self.chol.solve_lower_triangular_mut(&mut a);
        let w = &self.s_minus_i * &a;
        let mean = a.dot(&self.q_mean);
        let var = (self.kernel.outputscale + a.dot(&w)).max(VARIANCE_FLOOR);
        Ok(CandidateMoments {
            point: x.to_vec(),
            mean,
            var,
            w,
        })
    }

    /// Full posterior covariance matrix of `f` over a point set.
    pub fn covariance(&self, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        self.check_points(points)?;
        let a = self.project(points);
        let k = self.kernel.matrix(points, points);
        let c = k + a.transpose() * (&self.s_minus_i * &a);
        Ok((&c + c.transpose()) * 0.5)
    }

    /// `P(f(x) ≤ γ)` at each point.
    pub fn level_set_probabilities(&self, points: &[Vec<f64>], gamma: f64) -> Result<Vec<f64>> {
        let (mean, var) = self.latent(points)?;
        Ok(mean
            .iter()
            .zip(&var)
            .map(|(m, v)| norm_cdf((gamma - m) / v.sqrt()))
            .collect())
    }

    /// Posterior mean of `z = Φ(f)` at each point.
    pub fn response_probabilities(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        let (mean, var) = self.latent(points)?;
        Ok(mean
            .iter()
            .zip(&var)
            .map(|(m, v)| norm_cdf(m / (1.0 + v).sqrt()))
            .collect())
    }
}

/// Moments of `f` at one candidate point.
#[derive(Debug, Clone)]
pub struct CandidateMoments {
    pub point: Vec<f64>,
    pub mean: f64,
    pub var: f64,
    w: DVector<f64>,
}

/// A point set with cached whitened projections and marginal moments.
#[derive(Debug, Clone)]
pub struct PreparedReference {
    points: Vec<Vec<f64>>,
    a: DMatrix<f64>,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

impl PreparedReference {
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `Cov(f(x_q), f(x_*))` for every cached point.
    pub fn cross_covariance(&self, model: &GpModel, cand: &CandidateMoments) -> Vec<f64> {
        let proj = self.a.tr_mul(&cand.w);
        self.points
            .iter()
            .zip(proj.iter())
            .map(|(p, aw)| {
                if p.as_slice() == cand.point.as_slice() {
                    cand.var
                } else {
                    model.kernel.eval(p, &cand.point) + aw
                }
            })
            .collect()
    }
}
