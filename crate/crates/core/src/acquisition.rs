//! Sampling strategies: utilities of a candidate point under the surrogate.
//!
//! The look-ahead strategies all have the form `Q(now) − E_y[Q(after y)]`,
//! built from [`resolved_posteriors`] rather than from expanded closed forms.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lookahead::{resolved_posteriors, z_moments, LookaheadTerms, QueryPair};
use crate::specfun::quadrature::{gauss_hermite_probabilists, Rule};
use crate::specfun::{binary_entropy, norm_cdf};
use crate::surrogate::{Bounds, GpModel, PreparedReference};

pub const DEFAULT_BETA: f64 = 1.96;
const BALD_NODES: usize = 30;

/// A sampling strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AcquisitionKind {
    StraddleZ { beta: f64 },
    LocalSUR,
    GlobalSUR,
    LocalMI,
    GlobalMI,
    EAVC,
    BALV,
    BALD,
    QuasiRandom,
}

impl AcquisitionKind {
    pub const NAMES: [&'static str; 9] = [
        "StraddleZ",
        "LocalSUR",
        "GlobalSUR",
        "LocalMI",
        "GlobalMI",
        "EAVC",
        "BALV",
        "BALD",
        "QuasiRandom",
    ];

    /// Parses a strategy name. `beta` is accepted only for `StraddleZ`
    /// (default 1.96).
    pub fn parse(name: &str, beta: Option<f64>) -> Result<Self> {
        let kind = match name {
            "StraddleZ" => {
                let beta = beta.unwrap_or(DEFAULT_BETA);
                if !(beta.is_finite() && beta >= 0.0) {
                    return Err(Error::config(format!(
                        "beta must be finite and nonnegative, got {beta}"
                    )));
                }
                return Ok(Self::StraddleZ { beta });
            }
            "LocalSUR" => Self::LocalSUR,
            "GlobalSUR" => Self::GlobalSUR,
            "LocalMI" => Self::LocalMI,
            "GlobalMI" => Self::GlobalMI,
            "EAVC" => Self::EAVC,
            "BALV" => Self::BALV,
            "BALD" => Self::BALD,
            "QuasiRandom" => Self::QuasiRandom,
            other => {
                return Err(Error::config(format!(
                    "unknown acquisition {other:?}; expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        };
        if beta.is_some() {
            return Err(Error::config(format!("beta only applies to StraddleZ, not {name}")));
        }
        Ok(kind)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::StraddleZ { .. } => "StraddleZ",
            Self::LocalSUR => "LocalSUR",
            Self::GlobalSUR => "GlobalSUR",
            Self::LocalMI => "LocalMI",
            Self::GlobalMI => "GlobalMI",
            Self::EAVC => "EAVC",
            Self::BALV => "BALV",
            Self::BALD => "BALD",
            Self::QuasiRandom => "QuasiRandom",
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self {
            Self::StraddleZ { beta } => Some(*beta),
            _ => None,
        }
    }

    /// Whether the strategy sums over a reference set.
    pub fn uses_reference_set(&self) -> bool {
        matches!(self, Self::GlobalSUR | Self::GlobalMI | Self::EAVC)
    }
}

impl fmt::Display for AcquisitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AcquisitionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, None)
    }
}

/// Quasi-random points over which global strategies sum their effect.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSet {
    points: Vec<Vec<f64>>,
    volume_constant: f64,
}

impl ReferenceSet {
    pub fn new(points: Vec<Vec<f64>>, bounds: &Bounds) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("reference set is empty"));
        }
        points.iter().try_for_each(|p| bounds.check(p))?;
        let volume_constant = bounds.volume() / points.len() as f64;
        Ok(Self {
            points,
            volume_constant,
        })
    }

    /// Maps points of the unit cube into `bounds`.
    pub fn from_unit(unit: &[Vec<f64>], bounds: &Bounds) -> Result<Self> {
        Self::new(unit.iter().map(|u| bounds.from_unit(u)).collect(), bounds)
    }

    /// Overrides the volume constant `C` (e.g. 1 for unit-weighted sums).
    pub fn with_volume_constant(mut self, c: f64) -> Self {
        self.volume_constant = c;
        self
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `C = Vol(B) / |G|`.
    pub fn volume_constant(&self) -> f64 {
        self.volume_constant
    }
}

fn misclassification(p: f64) -> f64 {
    p.min(1.0 - p)
}

/// `Q(π) − E_y[Q(π_y)]` for one reference point.
fn expected_reduction(terms: &LookaheadTerms, q: impl Fn(f64) -> f64) -> Result<f64> {
    let post = resolved_posteriors(terms)?;
    Ok(q(terms.current()) - (post.p1 * q(post.pi_1) + (1.0 - post.p1) * q(post.pi_0)))
}

/// `−|E[z] − θ| + β √Var[z]`.
pub fn straddle_z(mu: f64, sigma: f64, theta: f64, beta: f64) -> Result<f64> {
    let (mean, var) = z_moments(mu, sigma)?;
    Ok(-(mean - theta).abs() + beta * var.sqrt())
}

/// Expected reduction in misclassification probability at the candidate itself.
pub fn local_sur(terms: &LookaheadTerms) -> Result<f64> {
    expected_reduction(terms, misclassification)
}

/// Expected reduction in misclassification probability summed over a reference set.
pub fn global_sur(terms: &[LookaheadTerms]) -> Result<f64> {
    terms.iter().try_fold(0.0, |acc, t| Ok(acc + local_sur(t)?))
}

/// Mutual information (bits) between the outcome and level-set membership at the candidate.
pub fn local_mi(terms: &LookaheadTerms) -> Result<f64> {
    expected_reduction(terms, binary_entropy)
}

/// Mutual information summed over a reference set.
pub fn global_mi(terms: &[LookaheadTerms]) -> Result<f64> {
    terms.iter().try_fold(0.0, |acc, t| Ok(acc + local_mi(t)?))
}

/// Expected absolute change of the estimated sublevel-set volume
/// `C Σ_q π(x_q)`. All terms must share the same candidate.
pub fn eavc(terms: &[LookaheadTerms], volume_constant: f64) -> Result<f64> {
    let Some(first) = terms.first() else {
        return Ok(0.0);
    };
    let p1 = first.p1;
    let (mut d1, mut d0) = (0.0, 0.0);
    for t in terms {
        let post = resolved_posteriors(t)?;
        let now = t.current();
        d1 += now - post.pi_1;
        d0 += now - post.pi_0;
    }
    Ok(volume_constant * (p1 * d1.abs() + (1.0 - p1) * d0.abs()))
}

/// Posterior variance of the response probability `z`.
pub fn balv(mu: f64, sigma: f64) -> Result<f64> {
    Ok(z_moments(mu, sigma)?.1)
}

fn bald_rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| gauss_hermite_probabilists(BALD_NODES))
}

/// Mutual information between the outcome and the latent function value:
/// `H_b(Φ(a)) − E_f[H_b(Φ(f))]`.
pub fn bald(mu: f64, sigma: f64) -> Result<f64> {
    if !(mu.is_finite() && sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::domain(format!("bald: invalid moments ({mu}, {sigma})")));
    }
    let marginal = binary_entropy(norm_cdf(mu / (1.0 + sigma * sigma).sqrt()));
    let expected: f64 = bald_rule()
        .iter()
        .map(|(t, w)| w * binary_entropy(norm_cdf(mu + sigma * t)))
        .sum();
    Ok(marginal - expected)
}

/// A strategy bound to a fitted model (and reference set for global strategies).
pub struct Acquisition<'a> {
    kind: AcquisitionKind,
    model: &'a GpModel,
    reference: Option<PreparedReference>,
    volume_constant: f64,
    theta: f64,
    gamma: f64,
}

impl<'a> Acquisition<'a> {
    /// `theta` is the target probability; the latent threshold is `Φ⁻¹(θ)`.
    pub fn new(kind: AcquisitionKind, model: &'a GpModel, refset: Option<&ReferenceSet>, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::domain(format!("threshold {theta} outside (0, 1)")));
        }
        let gamma = crate::specfun::norm_ppf(theta)?;
        let (reference, volume_constant) = if kind.uses_reference_set() {
            let refset = refset.ok_or_else(|| Error::domain(format!("{kind} needs a reference set")))?;
            (Some(model.prepare(refset.points())?), refset.volume_constant())
        } else {
            (None, 1.0)
        };
        Ok(Self {
            kind,
            model,
            reference,
            volume_constant,
            theta,
            gamma,
        })
    }

    pub fn kind(&self) -> AcquisitionKind {
        self.kind
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Look-ahead terms of every reference point against candidate `x`.
    pub fn reference_terms(&self, x: &[f64]) -> Result<Vec<LookaheadTerms>> {
        let reference = self
            .reference
            .as_ref()
            .ok_or_else(|| Error::domain("acquisition has no reference set"))?;
        let cand = self.model.candidate(x)?;
        let cov = reference.cross_covariance(self.model, &cand);
        (0..reference.len())
            .map(|i| {
                let pair = QueryPair {
                    mu_q: reference.mean[i],
                    var_q: reference.var[i],
                    mu_star: cand.mean,
                    var_star: cand.var,
                    cov_qstar: cov[i],
                };
                LookaheadTerms::new(&pair, self.gamma)
            })
            .collect()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        match self.kind {
            AcquisitionKind::QuasiRandom => Err(Error::domain("quasi-random sampling has no acquisition value")),
            AcquisitionKind::GlobalSUR => global_sur(&self.reference_terms(x)?),
            AcquisitionKind::GlobalMI => global_mi(&self.reference_terms(x)?),
            AcquisitionKind::EAVC => eavc(&self.reference_terms(x)?, self.volume_constant),
            _ => {
                let cand = self.model.candidate(x)?;
                let sigma = cand.var.sqrt();
                match self.kind {
                    AcquisitionKind::StraddleZ { beta } => straddle_z(cand.mean, sigma, self.theta, beta),
                    AcquisitionKind::BALV => balv(cand.mean, sigma),
                    AcquisitionKind::BALD => bald(cand.mean, sigma),
                    AcquisitionKind::LocalSUR | AcquisitionKind::LocalMI => {
                        let terms = LookaheadTerms::new(&QueryPair::at_candidate(cand.mean, cand.var), self.gamma)?;
                        if self.kind == AcquisitionKind::LocalSUR {
                            local_sur(&terms)
                        } else {
                            local_mi(&terms)
                        }
                    }
                    _ => unreachable!("global and quasi-random kinds handled above"),
                }
            }
        }
    }
}
