//! Full-batch variational inference for the whitened probit SVGP.
//!
//! The variational distribution is updated by damped natural-gradient steps
//! (the probit likelihood is log-concave, so the target precision is always
//! positive definite); the log kernel hyperparameters by normalized gradient
//! ascent with an adaptive step. Steps are only accepted when the objective
//! (ELBO plus log hyperprior) increases.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::kernel::KernelParams;
use super::kmeans::kmeans;
use super::model::{FitDiagnostics, GpModel};
use crate::error::{Error, Result};
use crate::specfun::quadrature::{gauss_hermite_probabilists, Rule};
use crate::specfun::{inv_mills, log_norm_cdf};

/// Surrogate settings. Defaults follow the benchmark protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateConfig {
    pub max_inducing: usize,
    pub max_iterations: usize,
    /// Converged after three consecutive iterations improving the objective by
    /// less than `rel_tolerance · max(1, |objective|)`.
    pub rel_tolerance: f64,
    pub jitter: f64,
    pub max_jitter: f64,
    pub kmeans_restarts: usize,
    pub kmeans_max_iterations: usize,
    pub quadrature_nodes: usize,
    /// Lengthscale prior median as a fraction of each coordinate's range.
    pub lengthscale_prior_fraction: f64,
    pub lengthscale_prior_log_sd: f64,
    pub outputscale_prior_median: f64,
    pub outputscale_prior_log_sd: f64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            max_inducing: 100,
            max_iterations: 500,
            rel_tolerance: 1e-5,
            jitter: 1e-6,
            max_jitter: 1e-2,
            kmeans_restarts: 10,
            kmeans_max_iterations: 100,
            quadrature_nodes: 20,
            lengthscale_prior_fraction: 0.25,
            lengthscale_prior_log_sd: 1.0,
            outputscale_prior_median: 4.0,
            outputscale_prior_log_sd: 1.0,
        }
    }
}

impl SurrogateConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if self.max_inducing == 0 || self.max_iterations == 0 || self.quadrature_nodes < 2 {
            return Err(Error::config("surrogate counts must be positive"));
        }
        if !(pos(self.rel_tolerance)
            && pos(self.jitter)
            && pos(self.max_jitter)
            && self.jitter <= self.max_jitter
            && pos(self.lengthscale_prior_fraction)
            && pos(self.lengthscale_prior_log_sd)
            && pos(self.outputscale_prior_median)
            && pos(self.outputscale_prior_log_sd))
        {
            return Err(Error::config("surrogate tolerances and prior scales must be positive"));
        }
        Ok(())
    }
}

/// Whether a refit starts from the previous model or from the prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefitMode {
    Warm,
    FromScratch,
}

/// Active-sampling iterations between from-scratch refits.
pub const DEFAULT_REFIT_INTERVAL: usize = 10;

/// Refit schedule for active-sampling iteration `iteration` (1-based): every
/// `interval`-th refit starts from scratch. `interval == 0` never does.
pub fn refit_policy(iteration: usize, interval: usize) -> RefitMode {
    if interval > 0 && iteration.is_multiple_of(interval) {
        RefitMode::FromScratch
    } else {
        RefitMode::Warm
    }
}

/// Fits the surrogate to `data`.
///
/// With `warm_start`, the previous inducing points, hyperparameters and
/// variational state seed the optimization and the result's objective is never
/// below the warm start's objective on `data`. Without it, inducing points are
/// placed by k-means (seeded from `rng`) and optimization starts at the prior.
pub fn fit<R: Rng + ?Sized>(
    data: &Dataset,
    config: &SurrogateConfig,
    warm_start: Option<&GpModel>,
    rng: &mut R,
) -> Result<GpModel> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::domain("cannot fit an empty dataset"));
    }
    let problem = Problem::new(data, config);
    let (inducing, theta, q) = match warm_start {
        Some(model) => {
            if model.dim() != data.dim() {
                return Err(Error::domain("warm-start model dimension differs from data"));
            }
            let theta = Theta::from_kernel(model.kernel());
            let q = QState::from_cov(model.variational_mean().clone(), model.variational_cov().clone())
                .ok_or_else(|| Error::domain("warm-start variational covariance is not positive definite"))?;
            (model.inducing_points().to_vec(), theta, q)
        }
        None => {
            let inducing = select_inducing(data, config, rng);
            let m = inducing.len();
            (inducing, problem.prior.median(), QState::prior(m))
        }
    };
    let (theta, q, jitter, diagnostics) = {
        let mut state = Optimizer::new(&problem, &inducing, theta, q)?;
        state.run()?;
        let diagnostics = FitDiagnostics {
            elbo: state.eval.elbo,
            objective: state.eval.objective,
            iterations: state.iterations,
            converged: state.converged,
            from_scratch: warm_start.is_none(),
        };
        (state.theta, state.q, state.factor.jitter, diagnostics)
    };
    GpModel::assemble(
        theta.kernel()?,
        inducing,
        q.mean,
        q.cov,
        jitter,
        data.clone(),
        diagnostics,
    )
}

/// `(ELBO, ELBO + log hyperprior)` of an existing model's state on `data`.
pub fn evaluate_objective(model: &GpModel, data: &Dataset, config: &SurrogateConfig) -> Result<(f64, f64)> {
    let problem = Problem::new(data, config);
    let q = QState::from_cov(model.variational_mean().clone(), model.variational_cov().clone())
        .ok_or_else(|| Error::domain("variational covariance is not positive definite"))?;
    let theta = Theta::from_kernel(model.kernel());
    let state = Optimizer::new(&problem, model.inducing_points(), theta, q)?;
    Ok((state.eval.elbo, state.eval.objective))
}

/// k-means centres of the distinct observed points, computed in unit-cube
/// coordinates; all distinct points when there are at most `max_inducing`.
pub fn select_inducing<R: Rng + ?Sized>(data: &Dataset, config: &SurrogateConfig, rng: &mut R) -> Vec<Vec<f64>> {
    let bounds = data.bounds();
    let unique = data.unique_points();
    if unique.len() <= config.max_inducing {
        return unique;
    }
    let unit: Vec<Vec<f64>> = unique.iter().map(|p| bounds.to_unit(p)).collect();
    kmeans(
        &unit,
        config.max_inducing,
        config.kmeans_restarts,
        config.kmeans_max_iterations,
        rng,
    )
    .iter()
    .map(|c| bounds.from_unit(c))
    .collect()
}

/// Log kernel hyperparameters: `d` log lengthscales then the log outputscale.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Theta(pub(crate) Vec<f64>);

impl Theta {
    fn from_kernel(k: &KernelParams) -> Self {
        let mut v: Vec<f64> = k.lengthscales.iter().map(|l| l.ln()).collect();
        v.push(k.outputscale.ln());
        Self(v)
    }

    fn dim(&self) -> usize {
        self.0.len() - 1
    }

    fn lengthscales(&self) -> Vec<f64> {
        self.0[..self.dim()].iter().map(|v| v.exp()).collect()
    }

    fn outputscale(&self) -> f64 {
        self.0[self.dim()].exp()
    }

    pub(crate) fn kernel(&self) -> Result<KernelParams> {
        KernelParams::new(self.lengthscales(), self.outputscale())
    }
}

/// Independent normal priors on the log hyperparameters.
#[derive(Debug, Clone)]
struct Hyperprior {
    mean: Vec<f64>,
    sd: Vec<f64>,
}

impl Hyperprior {
    fn new(data: &Dataset, config: &SurrogateConfig) -> Self {
        let mut mean: Vec<f64> = data
            .bounds()
            .ranges()
            .iter()
            .map(|r| (config.lengthscale_prior_fraction * r).ln())
            .collect();
        let mut sd = vec![config.lengthscale_prior_log_sd; mean.len()];
        mean.push(config.outputscale_prior_median.ln());
        sd.push(config.outputscale_prior_log_sd);
        Self { mean, sd }
    }

    fn median(&self) -> Theta {
        Theta(self.mean.clone())
    }

    fn log_density(&self, theta: &Theta) -> f64 {
        theta
            .0
            .iter()
            .zip(&self.mean)
            .zip(&self.sd)
            .map(|((t, m), s)| {
                let u = (t - m) / s;
                -0.5 * u * u - s.ln() - crate::specfun::LN_SQRT_2PI
            })
            .sum()
    }

    fn gradient(&self, theta: &Theta) -> Vec<f64> {
        theta
            .0
            .iter()
            .zip(&self.mean)
            .zip(&self.sd)
            .map(|((t, m), s)| -(t - m) / (s * s))
            .collect()
    }
}

pub(crate) struct Problem<'a> {
    x: &'a [Vec<f64>],
    /// Outcomes as ±1.
    sign: Vec<f64>,
    rule: Rule,
    prior: Hyperprior,
    config: &'a SurrogateConfig,
}

impl<'a> Problem<'a> {
    pub(crate) fn new(data: &'a Dataset, config: &'a SurrogateConfig) -> Self {
        Self {
            x: data.points(),
            sign: data.outcomes().iter().map(|&y| if y { 1.0 } else { -1.0 }).collect(),
            rule: gauss_hermite_probabilists(config.quadrature_nodes),
            prior: Hyperprior::new(data, config),
            config,
        }
    }
}

/// Kernel-dependent quantities.
pub(crate) struct Factor {
    kzz: DMatrix<f64>,
    kzx: DMatrix<f64>,
    l: DMatrix<f64>,
    /// `L⁻¹ K_zx`.
    a: DMatrix<f64>,
    outputscale: f64,
    jitter: f64,
}

impl Factor {
    fn new(problem: &Problem, z: &[Vec<f64>], theta: &Theta) -> Result<Self> {
        let kernel = theta.kernel()?;
        let kzz = kernel.matrix(z, z);
        let kzx = kernel.matrix(z, problem.x);
        let m = z.len();
        let mut jitter = problem.config.jitter;
        loop {
            let mut k = kzz.clone();
            for i in 0..m {
                k[(i, i)] += jitter;
            }
            if let Some(ch) = k.cholesky() {
                let l = ch.unpack();
                let mut a = kzx.clone();
                l.solve_lower_triangular_mut(&mut a);
                return Ok(Self {
                    kzz,
                    kzx,
                    l,
                    a,
                    outputscale: kernel.outputscale,
                    jitter,
                });
            }
            jitter *= 10.0;
            if jitter > problem.config.max_jitter * (1.0 + 1e-9) {
                return Err(Error::Fit {
                    reason: format!(
                        "inducing covariance not positive definite up to jitter {}",
                        problem.config.max_jitter
                    ),
                    iterations: 0,
                    objective: f64::NAN,
                });
            }
        }
    }
}

/// Whitened variational state `q(v) = N(mean, cov)` with cached precision.
#[derive(Debug, Clone)]
pub(crate) struct QState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    prec: DMatrix<f64>,
    logdet_cov: f64,
}

impl QState {
    fn prior(m: usize) -> Self {
        Self {
            mean: DVector::zeros(m),
            cov: DMatrix::identity(m, m),
            prec: DMatrix::identity(m, m),
            logdet_cov: 0.0,
        }
    }

    fn from_cov(mean: DVector<f64>, cov: DMatrix<f64>) -> Option<Self> {
        let ch = cov.clone().cholesky()?;
        let logdet_cov = 2.0 * ch.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let prec = ch.inverse();
        Some(Self {
            mean,
            cov,
            prec,
            logdet_cov,
        })
    }

    fn from_natural(prec: DMatrix<f64>, shift: &DVector<f64>) -> Option<Self> {
        let prec = (&prec + prec.transpose()) * 0.5;
        let ch = prec.clone().cholesky()?;
        let logdet_prec = 2.0 * ch.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let cov = ch.inverse();
        let cov = (&cov + cov.transpose()) * 0.5;
        let mean = ch.solve(shift);
        if mean.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some(Self {
            mean,
            cov,
            prec,
            logdet_cov: -logdet_prec,
        })
    }

    fn kl(&self) -> f64 {
        let m = self.mean.len() as f64;
        0.5 * (self.cov.trace() + self.mean.norm_squared() - m - self.logdet_cov)
    }
}

/// Likelihood terms at one `(θ, q)`.
pub(crate) struct Eval {
    mu: DVector<f64>,
    /// `S A`.
    sa: DMatrix<f64>,
    /// `∂ℓ/∂μ`.
    g: DVector<f64>,
    /// `∂ℓ/∂s` of the quadrature rule.
    h: DVector<f64>,
    /// `½ E[∂²ℓ/∂f²]`, always negative; used as curvature.
    h_curv: DVector<f64>,
    elbo: f64,
    objective: f64,
}

fn evaluate(problem: &Problem, factor: &Factor, q: &QState, theta: &Theta) -> Eval {
    let a = &factor.a;
    let n = a.ncols();
    let mu = a.tr_mul(&q.mean);
    let sa = &q.cov * a;
    let mut g = DVector::zeros(n);
    let mut h = DVector::zeros(n);
    let mut h_curv = DVector::zeros(n);
    let mut ell = 0.0;
    for i in 0..n {
        let ai = a.column(i);
        let s = (factor.outputscale - ai.norm_squared() + ai.dot(&sa.column(i))).max(1e-12);
        let sd = s.sqrt();
        let y = problem.sign[i];
        let (mut li, mut gi, mut hi, mut ci) = (0.0, 0.0, 0.0, 0.0);
        for (t, w) in problem.rule.iter() {
            let u = y * (mu[i] + sd * t);
            let r = inv_mills(u);
            li += w * log_norm_cdf(u);
            gi += w * y * r;
            hi += w * y * r * t;
            ci += w * (-r * (u + r));
        }
        ell += li;
        g[i] = gi;
        h[i] = hi / (2.0 * sd);
        h_curv[i] = 0.5 * ci.min(-1e-12);
    }
    let elbo = ell - q.kl();
    let objective = elbo + problem.prior.log_density(theta);
    Eval {
        mu,
        sa,
        g,
        h,
        h_curv,
        elbo,
        objective,
    }
}

/// Damped natural-gradient step on `q` with step `rho ∈ (0, 1]`.
fn natural_step(factor: &Factor, q: &QState, eval: &Eval, rho: f64) -> Option<QState> {
    let a = &factor.a;
    let m = a.nrows();
    let mut b = a.clone();
    for (j, mut col) in b.column_iter_mut().enumerate() {
        col *= (-2.0 * eval.h_curv[j]).sqrt();
    }
    let target_prec = DMatrix::identity(m, m) + &b * b.transpose();
    let weights = eval
        .g
        .zip_map(&eval.h_curv.zip_map(&eval.mu, |h, mu| 2.0 * h * mu), |g, t| g - t);
    let target_shift = a * weights;
    let shift = &q.prec * &q.mean;
    let prec = &q.prec * (1.0 - rho) + target_prec * rho;
    let shift = shift * (1.0 - rho) + target_shift * rho;
    QState::from_natural(prec, &shift)
}

/// Gradient of the objective with respect to the log hyperparameters.
pub(crate) fn theta_gradient(
    problem: &Problem,
    z: &[Vec<f64>],
    factor: &Factor,
    q: &QState,
    eval: &Eval,
    theta: &Theta,
) -> Vec<f64> {
    let a = &factor.a;
    let (m, n) = a.shape();
    // Adjoint of A: Ā_i = g_i m + 2 h_i (S − I) a_i.
    let mut abar = &eval.sa - a;
    for j in 0..n {
        let hj = 2.0 * eval.h[j];
        let gj = eval.g[j];
        let mut col = abar.column_mut(j);
        col *= hj;
        col.axpy(gj, &q.mean, 1.0);
    }
    // A = L⁻¹ K_zx.
    let kzx_bar = factor
        .l
        .tr_solve_lower_triangular(&abar)
        .unwrap_or_else(|| DMatrix::zeros(m, n));
    let lbar = -(&kzx_bar * a.transpose()).lower_triangle();
    // Cholesky backward pass.
    let mut p = (factor.l.transpose() * &lbar).lower_triangle();
    for i in 0..m {
        p[(i, i)] *= 0.5;
    }
    let y = factor
        .l
        .tr_solve_lower_triangular(&p)
        .unwrap_or_else(|| DMatrix::zeros(m, m));
    let x = factor
        .l
        .tr_solve_lower_triangular(&y.transpose())
        .unwrap_or_else(|| DMatrix::zeros(m, m))
        .transpose();
    let kzz_bar = (&x + x.transpose()) * 0.5;

    let d = theta.dim();
    let ls = theta.lengthscales();
    let mut grad = problem.prior.gradient(theta);
    // Outputscale: every kernel entry scales linearly; diag k(x, x) enters through s_i.
    let mut g_os = kzz_bar.component_mul(&factor.kzz).sum() + kzx_bar.component_mul(&factor.kzx).sum();
    g_os += eval.h.sum() * factor.outputscale;
    grad[d] += g_os;
    for (k, l) in ls.iter().enumerate() {
        let inv_l2 = 1.0 / (l * l);
        let mut acc = 0.0;
        for j in 0..m {
            for i in 0..m {
                let diff = z[i][k] - z[j][k];
                acc += kzz_bar[(i, j)] * factor.kzz[(i, j)] * diff * diff;
            }
        }
        for j in 0..n {
            let xj = problem.x[j][k];
            for i in 0..m {
                let diff = z[i][k] - xj;
                acc += kzx_bar[(i, j)] * factor.kzx[(i, j)] * diff * diff;
            }
        }
        grad[k] += acc * inv_l2;
    }
    grad
}

/// Largest change of a log hyperparameter in one step.
const MAX_THETA_STEP: f64 = 1.0;
/// Log hyperparameters are kept inside this box around the prior median.
const THETA_BOX_SDS: f64 = 6.0;

pub(crate) struct Optimizer<'a> {
    problem: &'a Problem<'a>,
    z: &'a [Vec<f64>],
    pub(crate) theta: Theta,
    q: QState,
    factor: Factor,
    eval: Eval,
    rho: f64,
    eta: f64,
    iterations: usize,
    converged: bool,
}

impl<'a> Optimizer<'a> {
    pub(crate) fn new(problem: &'a Problem<'a>, z: &'a [Vec<f64>], theta: Theta, q: QState) -> Result<Self> {
        let theta = Self::clamp_theta(problem, theta);
        let factor = Factor::new(problem, z, &theta)?;
        let eval = evaluate(problem, &factor, &q, &theta);
        if !eval.objective.is_finite() {
            return Err(Error::Fit {
                reason: "initial objective is not finite".into(),
                iterations: 0,
                objective: eval.objective,
            });
        }
        Ok(Self {
            problem,
            z,
            theta,
            q,
            factor,
            eval,
            rho: 1.0,
            eta: 0.1,
            iterations: 0,
            converged: false,
        })
    }

    fn clamp_theta(problem: &Problem, mut theta: Theta) -> Theta {
        for ((t, m), s) in theta.0.iter_mut().zip(&problem.prior.mean).zip(&problem.prior.sd) {
            *t = t.clamp(m - THETA_BOX_SDS * s, m + THETA_BOX_SDS * s);
        }
        theta
    }

    fn step_q(&mut self) {
        if let Some(q) = natural_step(&self.factor, &self.q, &self.eval, self.rho) {
            let eval = evaluate(self.problem, &self.factor, &q, &self.theta);
            if eval.objective.is_finite() && eval.objective > self.eval.objective {
                self.q = q;
                self.eval = eval;
                self.rho = (self.rho * 2.0).min(1.0);
                return;
            }
        }
        self.rho = (self.rho * 0.5).max(1e-3);
    }

    fn step_theta(&mut self) {
        let grad = theta_gradient(self.problem, self.z, &self.factor, &self.q, &self.eval, &self.theta);
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return;
        }
        let step = self.eta.min(MAX_THETA_STEP);
        let proposal = Theta(
            self.theta
                .0
                .iter()
                .zip(&grad)
                .map(|(t, g)| t + step * g / norm)
                .collect(),
        );
        let proposal = Self::clamp_theta(self.problem, proposal);
        if let Ok(factor) = Factor::new(self.problem, self.z, &proposal) {
            let eval = evaluate(self.problem, &factor, &self.q, &proposal);
            if eval.objective.is_finite() && eval.objective > self.eval.objective {
                self.theta = proposal;
                self.factor = factor;
                self.eval = eval;
                self.eta = (self.eta * 1.5).min(MAX_THETA_STEP);
                return;
            }
        }
        self.eta = (self.eta * 0.5).max(1e-8);
    }

    fn run(&mut self) -> Result<()> {
        let tol = self.problem.config.rel_tolerance;
        let mut stalled = 0;
        while self.iterations < self.problem.config.max_iterations {
            self.iterations += 1;
            let before = self.eval.objective;
            self.step_q();
            self.step_theta();
            if !self.eval.objective.is_finite() {
                return Err(Error::Fit {
                    reason: "objective became non-finite".into(),
                    iterations: self.iterations,
                    objective: self.eval.objective,
                });
            }
            if self.eval.objective - before < tol * before.abs().max(1.0) {
                stalled += 1;
                if stalled >= 3 {
                    self.converged = true;
                    break;
                }
            } else {
                stalled = 0;
            }
        }
        Ok(())
    }
}
