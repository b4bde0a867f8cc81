//! Level-set posteriors, moments of `z = Φ(f)`, and the closed-form
//! look-ahead level-set posteriors after one hypothetical observation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{bvn_cdf, norm_cdf, owens_t_unchecked, BvnCorrelation};

/// `σ_q` is floored here before forming `b_q`.
pub const SIGMA_FLOOR: f64 = 1e-6;
/// `P(y_* = 1)` closer than this to 0 or 1 makes one outcome impossible.
pub const DEGENERATE_P1: f64 = 1e-12;
/// Raw look-ahead posteriors may leave `[0, 1]` by at most this much.
pub const RANGE_TOLERANCE: f64 = 1e-7;

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite, got {v}")))
    }
}

/// `P(f(x) ≤ γ) = Φ((γ − μ) / σ)`.
pub fn level_set_posterior(mu: f64, sigma: f64, gamma: f64) -> Result<f64> {
    finite("mu", mu)?;
    finite("gamma", gamma)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
    }
    Ok(norm_cdf((gamma - mu) / sigma))
}

/// Mean and variance of `z = Φ(f)` for `f ~ N(μ, σ²)`.
///
/// The mean is `Φ(a)` with `a = μ / √(1 + σ²)`; the variance is
/// `Φ(a) − Φ(a)² − 2 T(a, 1/√(1 + 2σ²))`.
pub fn z_moments(mu: f64, sigma: f64) -> Result<(f64, f64)> {
    finite("mu", mu)?;
    finite("sigma", sigma)?;
    if sigma < 0.0 {
        return Err(Error::domain(format!("sigma must be nonnegative, got {sigma}")));
    }
    let s2 = sigma * sigma;
    let a = mu / (1.0 + s2).sqrt();
    let c = 1.0 / (1.0 + 2.0 * s2).sqrt();
    let mean = norm_cdf(a);
    let bernoulli = mean * norm_cdf(-a);
    let var = (mean - mean * mean - 2.0 * owens_t_unchecked(a, c)).clamp(0.0, bernoulli);
    Ok((mean, var))
}

/// `P(y = 1) = Φ(μ / √(1 + σ²))`.
pub fn prob_y1(mu: f64, sigma: f64) -> f64 {
    norm_cdf(mu / (1.0 + sigma * sigma).sqrt())
}

/// Latent moments of one query point jointly with the candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryPair {
    pub mu_q: f64,
    pub var_q: f64,
    pub mu_star: f64,
    pub var_star: f64,
    pub cov_qstar: f64,
}

impl QueryPair {
    /// The pair with `x_q = x_*`.
    pub fn at_candidate(mu: f64, var: f64) -> Self {
        Self {
            mu_q: mu,
            var_q: var,
            mu_star: mu,
            var_star: var,
            cov_qstar: var,
        }
    }
}

impl crate::surrogate::PosteriorQuery {
    pub fn pair(&self, i: usize) -> QueryPair {
        QueryPair {
            mu_q: self.mu_q[i],
            var_q: self.var_q[i],
            mu_star: self.mu_star,
            var_star: self.var_star,
            cov_qstar: self.cov_qstar[i],
        }
    }
}

/// Scalars that parameterize every closed-form look-ahead acquisition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LookaheadTerms {
    /// `μ_* / √(1 + σ_*²)`.
    pub a_star: f64,
    /// `(γ − μ_q) / σ_q`.
    pub b_q: f64,
    /// `1 / √(1 + 2σ_*²)`.
    pub c_star: f64,
    /// Correlation `−σ_q* / (σ_q √(1 + σ_*²))`.
    pub rho: f64,
    /// `BvN(a_*, b_q; ρ)`, the joint probability of `y_* = 1` and `f(x_q) ≤ γ`.
    pub z_qstar: f64,
    /// `Φ(a_*)`.
    pub p1: f64,
}

impl LookaheadTerms {
    pub fn new(pair: &QueryPair, gamma: f64) -> Result<Self> {
        for (name, v) in [
            ("mu_q", pair.mu_q),
            ("var_q", pair.var_q),
            ("mu_star", pair.mu_star),
            ("var_star", pair.var_star),
            ("cov_qstar", pair.cov_qstar),
            ("gamma", gamma),
        ] {
            finite(name, v)?;
        }
        if pair.var_q < 0.0 || pair.var_star < 0.0 {
            return Err(Error::domain("variances must be nonnegative"));
        }
        let sigma_q = pair.var_q.sqrt().max(SIGMA_FLOOR);
        let scale = (1.0 + pair.var_star).sqrt();
        let a_star = pair.mu_star / scale;
        let b_q = (gamma - pair.mu_q) / sigma_q;
        let c_star = 1.0 / (1.0 + 2.0 * pair.var_star).sqrt();
        let rho = (-pair.cov_qstar / (sigma_q * scale)).clamp(-1.0, 1.0);
        let z_qstar = bvn_cdf(a_star, b_q, BvnCorrelation::saturating(rho));
        Ok(Self {
            a_star,
            b_q,
            c_star,
            rho,
            z_qstar,
            p1: norm_cdf(a_star),
        })
    }

    /// Current level-set posterior `Φ(b_q)`.
    pub fn current(&self) -> f64 {
        norm_cdf(self.b_q)
    }

    /// `P(y_* = 0, f(x_q) ≤ γ)`, computed directly rather than as `Φ(b_q) − Z_q*`.
    pub fn z_qstar_complement(&self) -> f64 {
        bvn_cdf(-self.a_star, self.b_q, BvnCorrelation::saturating(-self.rho))
    }
}

/// Level-set posteriors at `x_q` after observing `y_* = 1` or `y_* = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LookaheadPosteriors {
    pub pi_1: f64,
    pub pi_0: f64,
    pub p1: f64,
}

fn checked_unit(value: f64) -> Result<f64> {
    if !(-RANGE_TOLERANCE..=1.0 + RANGE_TOLERANCE).contains(&value) {
        return Err(Error::PosteriorOutOfRange { value });
    }
    Ok(value.clamp(0.0, 1.0))
}

fn branch_one(terms: &LookaheadTerms) -> Result<f64> {
    checked_unit(terms.z_qstar / terms.p1)
}

fn branch_zero(terms: &LookaheadTerms) -> Result<f64> {
    checked_unit(terms.z_qstar_complement() / norm_cdf(-terms.a_star))
}

/// Both look-ahead posteriors. Fails with [`Error::DegenerateLikelihood`] when
/// either outcome has probability within `1e-12` of zero.
pub fn lookahead_posteriors(terms: &LookaheadTerms) -> Result<LookaheadPosteriors> {
    let p1 = terms.p1;
    if !(DEGENERATE_P1..=1.0 - DEGENERATE_P1).contains(&p1) {
        return Err(Error::DegenerateLikelihood { p1 });
    }
    Ok(LookaheadPosteriors {
        pi_1: branch_one(terms)?,
        pi_0: branch_zero(terms)?,
        p1,
    })
}

/// As [`lookahead_posteriors`], but an impossible outcome's branch is the
/// current posterior `Φ(b_q)` instead of an error.
pub fn resolved_posteriors(terms: &LookaheadTerms) -> Result<LookaheadPosteriors> {
    let p1 = terms.p1;
    if p1 < DEGENERATE_P1 {
        Ok(LookaheadPosteriors {
            pi_1: terms.current(),
            pi_0: branch_zero(terms)?,
            p1,
        })
    } else if p1 > 1.0 - DEGENERATE_P1 {
        Ok(LookaheadPosteriors {
            pi_1: branch_one(terms)?,
            pi_0: terms.current(),
            p1,
        })
    } else {
        lookahead_posteriors(terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn level_set_examples() {
        assert_eq!(level_set_posterior(0.3, 2.0, 0.3).unwrap(), 0.5);
        assert!((level_set_posterior(1.0, 0.5, 1.5).unwrap() - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((level_set_posterior(2.5, 1.0, -0.5).unwrap() - 0.001_349_898_031_630_094_6).abs() < 1e-15);
        assert!(level_set_posterior(0.0, 0.0, 0.0).is_err());
        assert!(level_set_posterior(0.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn z_moment_examples() {
        let (m, v) = z_moments(0.4, 0.0).unwrap();
        assert_eq!(m, norm_cdf(0.4));
        assert!(v.abs() < 1e-15);
        for s in [0.1, 1.0, 5.0] {
            assert_eq!(z_moments(0.0, s).unwrap().0, 0.5);
        }
        assert!(z_moments(0.0, -1.0).is_err());
        assert!(z_moments(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn prob_y1_examples() {
        assert_eq!(prob_y1(0.0, 3.0), 0.5);
        assert_eq!(prob_y1(0.7, 0.0), norm_cdf(0.7));
        assert!((prob_y1(1.0, 2.0) - 0.672_639_576_990_711_4).abs() < 1e-12);
    }

    #[test]
    fn independence_leaves_posterior_unchanged() {
        let pair = QueryPair {
            mu_q: 0.3,
            var_q: 0.8,
            mu_star: -0.4,
            var_star: 1.3,
            cov_qstar: 0.0,
        };
        let t = LookaheadTerms::new(&pair, 0.1).unwrap();
        let p = lookahead_posteriors(&t).unwrap();
        assert!((p.pi_1 - t.current()).abs() < 1e-15);
        assert!((p.pi_0 - t.current()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_outcome_probability() {
        let pair = QueryPair::at_candidate(9.0, 0.01);
        let t = LookaheadTerms::new(&pair, 0.0).unwrap();
        assert!(matches!(
            lookahead_posteriors(&t),
            Err(Error::DegenerateLikelihood { .. })
        ));
        let r = resolved_posteriors(&t).unwrap();
        assert_eq!(r.pi_0, t.current());
        let pair = QueryPair::at_candidate(-9.0, 0.01);
        let t = LookaheadTerms::new(&pair, 0.0).unwrap();
        let r = resolved_posteriors(&t).unwrap();
        assert_eq!(r.pi_1, t.current());
    }

    #[test]
    fn candidate_pair_matches_general_formula() {
        let mu = 0.2;
        let var = 0.7;
        let a = LookaheadTerms::new(&QueryPair::at_candidate(mu, var), 0.5).unwrap();
        let b = LookaheadTerms::new(
            &QueryPair {
                mu_q: mu,
                var_q: var,
                mu_star: mu,
                var_star: var,
                cov_qstar: var,
            },
            0.5,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    fn pair_strategy() -> impl Strategy<Value = (QueryPair, f64)> {
        (
            -3.0..3.0f64,
            0.01..4.0f64,
            -3.0..3.0f64,
            0.01..4.0f64,
            -0.999..0.999f64,
            -2.0..2.0f64,
        )
            .prop_map(|(mq, vq, ms, vs, r, g)| {
                (
                    QueryPair {
                        mu_q: mq,
                        var_q: vq,
                        mu_star: ms,
                        var_star: vs,
                        cov_qstar: r * (vq * vs).sqrt(),
                    },
                    g,
                )
            })
    }

    proptest! {
        #[test]
        fn tower_property((pair, gamma) in pair_strategy()) {
            let t = LookaheadTerms::new(&pair, gamma).unwrap();
            let p = lookahead_posteriors(&t).unwrap();
            let mix = p.p1 * p.pi_1 + (1.0 - p.p1) * p.pi_0;
            prop_assert!((mix - t.current()).abs() <= 5e-8);
        }

        #[test]
        fn frechet_bounds((pair, gamma) in pair_strategy()) {
            let t = LookaheadTerms::new(&pair, gamma).unwrap();
            let pb = t.current();
            prop_assert!(t.z_qstar <= t.p1.min(pb) + 1e-14);
            prop_assert!(t.z_qstar >= (t.p1 + pb - 1.0).max(0.0) - 1e-14);
            prop_assert!(t.c_star > 0.0 && t.c_star <= 1.0);
        }

        #[test]
        fn success_lowers_sublevel_probability((pair, gamma) in pair_strategy()) {
            prop_assume!(pair.cov_qstar > 0.0);
            let t = LookaheadTerms::new(&pair, gamma).unwrap();
            let p = lookahead_posteriors(&t).unwrap();
            prop_assert!(p.pi_1 <= t.current() + 1e-12);
            prop_assert!(t.current() <= p.pi_0 + 1e-12);
        }

        #[test]
        fn z_variance_is_bounded(mu in -4.0..4.0f64, sigma in 0.0..5.0f64) {
            let (m, v) = z_moments(mu, sigma).unwrap();
            prop_assert!(v >= 0.0 && v <= m * (1.0 - m) + 1e-15);
        }

        #[test]
        fn no_correlation_means_no_update(mu in -3.0..3.0f64, sigma in 0.05..3.0f64, mu_s in -3.0..3.0f64, var_s in 0.01..4.0f64, gamma in -2.0..2.0f64) {
            let pair = QueryPair { mu_q: mu, var_q: sigma * sigma, mu_star: mu_s, var_star: var_s, cov_qstar: 0.0 };
            let t = LookaheadTerms::new(&pair, gamma).unwrap();
            let p = lookahead_posteriors(&t).unwrap();
            let direct = level_set_posterior(mu, sigma, gamma).unwrap();
            prop_assert!((p.pi_1 - direct).abs() < 1e-14);
            prop_assert!((p.pi_0 - direct).abs() < 1e-14);
        }
    }
}
