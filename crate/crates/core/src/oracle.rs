//! Independent reference computations and the numerical check suites built on
//! them.
//!
//! Everything here is slow on purpose: quadrature of raw densities, Monte
//! Carlo simulation of the generative model, and branch-by-branch enumeration
//! of the acquisition definitions. The library's closed forms are checked
//! against these, never the other way round.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::acquisition::{eavc, global_mi, global_sur, local_mi, local_sur};
use crate::error::Result;
use crate::lookahead::{lookahead_posteriors, z_moments, LookaheadTerms, QueryPair};
use crate::optim::SobolStream;
use crate::problems::{problem_by_name, PROBLEM_NAMES};
use crate::specfun::quadrature::integrate_adaptive;
use crate::specfun::{binary_entropy, bvn_cdf, norm_cdf, owens_t, BvnCorrelation};

const TAIL: f64 = 12.0;

fn density(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

/// Owen's T by adaptive quadrature of its defining integral.
pub fn owens_t_quadrature(h: f64, a: f64) -> f64 {
    let f = |x: f64| {
        let q = 1.0 + x * x;
        (-0.5 * h * h * q).exp() / q
    };
    integrate_adaptive(&f, 0.0, a, 1e-15) / (2.0 * PI)
}

/// `P(X ≤ x, Y ≤ y)` for standard bivariate normals with correlation `rho`,
/// `|rho| < 1`, by iterated adaptive quadrature of the joint density.
///
/// Writing `Y = ρX + √(1−ρ²) U`, the density factorizes as `φ(s) φ(u)`
/// over the region `s ≤ x`, `u ≤ (y − ρs)/√(1−ρ²)`.
pub fn bvn_quadrature(x: f64, y: f64, rho: f64) -> f64 {
    assert!(rho.abs() < 1.0, "bvn_quadrature needs |rho| < 1");
    let sd = (1.0 - rho * rho).sqrt();
    let upper = x.min(TAIL);
    if upper <= -TAIL {
        return 0.0;
    }
    let inner = |s: f64| {
        let u_max = ((y - rho * s) / sd).min(TAIL);
        if u_max <= -TAIL {
            0.0
        } else {
            density(s) * integrate_adaptive(&density, -TAIL, u_max, 1e-14)
        }
    };
    // Split at the ridge where the inner limit crosses zero.
    let mut cuts = vec![-TAIL, upper];
    if rho != 0.0 {
        let ridge = y / rho;
        if ridge > -TAIL && ridge < upper {
            cuts.insert(1, ridge);
        }
    }
    cuts.windows(2)
        .map(|w| integrate_adaptive(&inner, w[0], w[1], 1e-13))
        .sum()
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// `|value − target|` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target).abs() / self.se
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Mean and variance of `Φ(f)`, `f ~ N(μ, σ²)`, from `n` samples.
pub fn mc_z_moments(mu: f64, sigma: f64, n: usize, rng: &mut impl Rng) -> (Estimate, Estimate) {
    let phi = std_normal();
    let z: Vec<f64> = (0..n)
        .map(|_| phi.cdf(mu + sigma * rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let nf = n as f64;
    let mean = z.iter().sum::<f64>() / nf;
    let (m2, m4) = z.iter().fold((0.0, 0.0), |(a, b), v| {
        let d = (v - mean).powi(2);
        (a + d, b + d * d)
    });
    let var = m2 / (nf - 1.0);
    let m4 = m4 / nf;
    (
        Estimate {
            value: mean,
            se: (var / nf).sqrt(),
        },
        Estimate {
            value: var,
            se: ((m4 - var * var).max(0.0) / nf).sqrt(),
        },
    )
}

/// Look-ahead posteriors by simulation: draws `(f_q, f_*)` from the joint
/// posterior and estimates `P(f_q ≤ γ | y_*)` by weighting each draw with the
/// outcome likelihood `Φ(f_*)` or `1 − Φ(f_*)`. Returns `(π₁, π₀, p1)`.
pub fn mc_lookahead(pair: &QueryPair, gamma: f64, n: usize, rng: &mut impl Rng) -> (Estimate, Estimate, Estimate) {
    let phi = std_normal();
    let sq = pair.var_q.sqrt();
    let ss = pair.var_star.sqrt();
    let r = pair.cov_qstar / (sq * ss);
    let resid = (1.0 - r * r).max(0.0).sqrt();
    // Ratio estimators: numerator sums a, denominators b, plus second moments
    // for the delta-method standard error.
    let mut acc = [[0.0f64; 5]; 2];
    for _ in 0..n {
        let e1: f64 = rng.sample(StandardNormal);
        let e2: f64 = rng.sample(StandardNormal);
        let fs = pair.mu_star + ss * e1;
        let fq = pair.mu_q + sq * (r * e1 + resid * e2);
        let w1 = phi.cdf(fs);
        let below = if fq <= gamma { 1.0 } else { 0.0 };
        for (k, w) in [w1, 1.0 - w1].into_iter().enumerate() {
            let a = below * w;
            acc[k][0] += a;
            acc[k][1] += w;
            acc[k][2] += a * a;
            acc[k][3] += w * w;
            acc[k][4] += a * w;
        }
    }
    let nf = n as f64;
    let ratio = |s: &[f64; 5]| {
        let (ma, mb) = (s[0] / nf, s[1] / nf);
        let va = s[2] / nf - ma * ma;
        let vb = s[3] / nf - mb * mb;
        let cab = s[4] / nf - ma * mb;
        let q = ma / mb;
        let var = (va - 2.0 * q * cab + q * q * vb) / (mb * mb * nf);
        Estimate {
            value: q,
            se: var.max(0.0).sqrt(),
        }
    };
    let mb = acc[0][1] / nf;
    let p1 = Estimate {
        value: mb,
        se: ((acc[0][3] / nf - mb * mb).max(0.0) / nf).sqrt(),
    };
    (ratio(&acc[0]), ratio(&acc[1]), p1)
}

/// `P(y_* = 1)`, the current level-set posterior, and both look-ahead
/// posteriors, by enumerating the two outcomes from the joint distribution of
/// `f_q` and the latent response `f_* + ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branches {
    pub p1: f64,
    pub current: f64,
    pub pi_1: f64,
    pub pi_0: f64,
}

pub fn enumerate_branches(pair: &QueryPair, gamma: f64) -> Branches {
    let sq = pair.var_q.sqrt();
    let s = (1.0 + pair.var_star).sqrt();
    let b = (gamma - pair.mu_q) / sq;
    let a = pair.mu_star / s;
    // y = 1 iff W = −(f_* + ε − μ_*)/s < a, and Corr(f_q, W) = −σ_q*/(σ_q s).
    let r = -pair.cov_qstar / (sq * s);
    let p1 = norm_cdf(a);
    let current = norm_cdf(b);
    let joint1 = bvn_cdf(b, a, BvnCorrelation::new(r).expect("valid correlation"));
    let joint0 = current - joint1;
    Branches {
        p1,
        current,
        pi_1: joint1 / p1,
        pi_0: joint0 / (1.0 - p1),
    }
}

fn misclassification(p: f64) -> f64 {
    p.min(1.0 - p)
}

fn two_branch(b: &Branches, q: fn(f64) -> f64) -> f64 {
    q(b.current) - b.p1 * q(b.pi_1) - (1.0 - b.p1) * q(b.pi_0)
}

/// The five look-ahead acquisitions for one candidate, by enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Composed {
    pub local_sur: f64,
    pub local_mi: f64,
    pub global_sur: f64,
    pub global_mi: f64,
    pub eavc: f64,
}

/// `candidate` is `(μ_*, σ_*²)`; `reference` holds `(μ_q, σ_q², σ_q*)`.
pub fn compose(candidate: (f64, f64), reference: &[(f64, f64, f64)], gamma: f64, volume_constant: f64) -> Composed {
    let (mu, var) = candidate;
    let here = enumerate_branches(&QueryPair::at_candidate(mu, var), gamma);
    let branches: Vec<Branches> = reference
        .iter()
        .map(|&(mu_q, var_q, cov_qstar)| {
            enumerate_branches(
                &QueryPair {
                    mu_q,
                    var_q,
                    mu_star: mu,
                    var_star: var,
                    cov_qstar,
                },
                gamma,
            )
        })
        .collect();
    let p1 = here.p1;
    let shift1: f64 = branches.iter().map(|b| b.pi_1 - b.current).sum();
    let shift0: f64 = branches.iter().map(|b| b.pi_0 - b.current).sum();
    Composed {
        local_sur: two_branch(&here, misclassification),
        local_mi: two_branch(&here, binary_entropy),
        global_sur: branches.iter().map(|b| two_branch(b, misclassification)).sum(),
        global_mi: branches.iter().map(|b| two_branch(b, binary_entropy)).sum(),
        eavc: volume_constant * (p1 * shift1.abs() + (1.0 - p1) * shift0.abs()),
    }
}

/// The library's values for the same inputs as [`compose`].
pub fn library_composed(
    candidate: (f64, f64),
    reference: &[(f64, f64, f64)],
    gamma: f64,
    volume_constant: f64,
) -> Result<Composed> {
    let (mu, var) = candidate;
    let here = LookaheadTerms::new(&QueryPair::at_candidate(mu, var), gamma)?;
    let terms = reference
        .iter()
        .map(|&(mu_q, var_q, cov_qstar)| {
            LookaheadTerms::new(
                &QueryPair {
                    mu_q,
                    var_q,
                    mu_star: mu,
                    var_star: var,
                    cov_qstar,
                },
                gamma,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Composed {
        local_sur: local_sur(&here)?,
        local_mi: local_mi(&here)?,
        global_sur: global_sur(&terms)?,
        global_mi: global_mi(&terms)?,
        eavc: eavc(&terms, volume_constant)?,
    })
}

impl Composed {
    pub fn values(&self) -> [(&'static str, f64); 5] {
        [
            ("LocalSUR", self.local_sur),
            ("LocalMI", self.local_mi),
            ("GlobalSUR", self.global_sur),
            ("GlobalMI", self.global_mi),
            ("EAVC", self.eavc),
        ]
    }
}

/// Outcome of one check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Random candidate/reference configurations for the acquisition checks.
pub struct RandomPosterior {
    pub candidate: (f64, f64),
    pub reference: Vec<(f64, f64, f64)>,
    pub gamma: f64,
}

impl RandomPosterior {
    /// `cov_scale = 0` gives uncorrelated reference points.
    pub fn draw(rng: &mut impl Rng, points: usize, cov_scale: f64) -> Self {
        let var_star = rng.random_range(0.05f64..4.0);
        let candidate = (rng.random_range(-2.5..2.5), var_star);
        let reference = (0..points)
            .map(|_| {
                let var_q = rng.random_range(0.05f64..4.0);
                let r = cov_scale * rng.random_range(-0.99..0.99);
                (rng.random_range(-3.0..3.0), var_q, r * (var_q * var_star).sqrt())
            })
            .collect();
        Self {
            candidate,
            reference,
            gamma: rng.random_range(-2.0..2.0),
        }
    }
}

/// Owen's T identities (`a = 0`, `h = 0`, `a = 1`) and agreement with
/// quadrature on `n` random inputs each; BvN against the density quadrature
/// on `n` random `(x, y, ρ)` with `|ρ| ≤ 0.999`.
pub fn check_special_functions(n: usize, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 4];
    for _ in 0..n {
        let h = rng.random_range(-8.0..8.0);
        let a = rng.random_range(-20.0..20.0);
        worst[0] = worst[0].max(owens_t(h, 0.0).unwrap().abs());
        worst[1] = worst[1].max((owens_t(0.0, a).unwrap() - a.atan() / (2.0 * PI)).abs());
        let p = norm_cdf(h);
        worst[2] = worst[2].max((owens_t(h, 1.0).unwrap() - 0.5 * p * (1.0 - p)).abs());
        worst[3] = worst[3].max((owens_t(h, a).unwrap() - owens_t_quadrature(h, a)).abs());
    }
    let mut bvn_worst = (0.0f64, (0.0, 0.0, 0.0));
    for _ in 0..n {
        let x = rng.random_range(-6.0..6.0);
        let y = rng.random_range(-6.0..6.0);
        let r = rng.random_range(-0.999..=0.999);
        let err = (bvn_cdf(x, y, BvnCorrelation::new(r).unwrap()) - bvn_quadrature(x, y, r)).abs();
        if err > bvn_worst.0 {
            bvn_worst = (err, (x, y, r));
        }
    }
    let names = [
        "owens_t(h, 0) = 0",
        "owens_t(0, a) = atan(a)/2π",
        "owens_t(h, 1) = Φ(h)Φ(−h)/2",
    ];
    let mut out: Vec<Check> = names
        .iter()
        .zip(worst)
        .map(|(name, w)| {
            Check::new(
                name,
                w <= 1e-10,
                format!("max error {w:.3e} over {n} inputs (tol 1e-10)"),
            )
        })
        .collect();
    out.push(Check::new(
        "owens_t vs quadrature",
        worst[3] <= 1e-10,
        format!("max error {:.3e} over {n} inputs (tol 1e-10)", worst[3]),
    ));
    out.push(Check::new(
        "bvn_cdf vs density quadrature",
        bvn_worst.0 <= 5e-8,
        format!(
            "max error {:.3e} at {:?} over {n} inputs (tol 5e-8)",
            bvn_worst.0, bvn_worst.1
        ),
    ));
    out
}

/// `p1 π₁ + (1 − p1) π₀ = Φ(b_q)` on `n` random query pairs.
pub fn check_tower(n: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut skipped = 0;
    for _ in 0..n {
        let p = RandomPosterior::draw(&mut rng, 1, 1.0);
        let (mu_q, var_q, cov_qstar) = p.reference[0];
        let pair = QueryPair {
            mu_q,
            var_q,
            mu_star: p.candidate.0,
            var_star: p.candidate.1,
            cov_qstar,
        };
        let terms = LookaheadTerms::new(&pair, p.gamma).expect("valid pair");
        match lookahead_posteriors(&terms) {
            Ok(post) => {
                let err = (post.p1 * post.pi_1 + (1.0 - post.p1) * post.pi_0 - terms.current()).abs();
                worst = worst.max(err);
            }
            Err(_) => skipped += 1,
        }
    }
    Check::new(
        "tower property",
        worst <= 5e-8 && skipped == 0,
        format!("max error {worst:.3e} over {n} pairs, {skipped} failures (tol 5e-8)"),
    )
}

const MC_MIN_PROBABILITY: f64 = 1e-4;

/// Moments of `z` and both look-ahead posteriors against `samples`-draw
/// simulations on `settings` random parameter settings each; every estimate
/// must be within 3 standard errors.
pub fn check_monte_carlo(settings: usize, samples: usize, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut moments = (0.0f64, 0usize);
    let mut posteriors = (0.0f64, 0usize);
    let mut errors = 0;
    for _ in 0..settings {
        let mu = rng.random_range(-2.0..2.0);
        let sigma = rng.random_range(0.1..2.0);
        let (mean, var) = z_moments(mu, sigma).expect("valid moments");
        let (em, ev) = mc_z_moments(mu, sigma, samples, &mut rng);
        for z in [em.z_score(mean), ev.z_score(var)] {
            moments.0 = moments.0.max(z);
            moments.1 += usize::from(z > 3.0);
        }
    }
    for _ in 0..settings {
        // Zero simulated hits leave the estimator without a standard error, so
        // settings whose sublevel event is too rare to resolve are redrawn.
        let p = loop {
            let p = RandomPosterior::draw(&mut rng, 1, 1.0);
            let (mu_q, var_q, _) = p.reference[0];
            let prior = norm_cdf((p.gamma - mu_q) / var_q.sqrt());
            if (MC_MIN_PROBABILITY..=1.0 - MC_MIN_PROBABILITY).contains(&prior) {
                break p;
            }
        };
        let (mu_q, var_q, cov_qstar) = p.reference[0];
        let pair = QueryPair {
            mu_q,
            var_q,
            mu_star: p.candidate.0,
            var_star: p.candidate.1,
            cov_qstar,
        };
        let Ok(post) = LookaheadTerms::new(&pair, p.gamma).and_then(|t| lookahead_posteriors(&t)) else {
            errors += 1;
            continue;
        };
        let (pi1, pi0, _) = mc_lookahead(&pair, p.gamma, samples, &mut rng);
        for z in [pi1.z_score(post.pi_1), pi0.z_score(post.pi_0)] {
            posteriors.0 = posteriors.0.max(z);
            posteriors.1 += usize::from(z > 3.0);
        }
    }
    vec![
        Check::new(
            "z moments vs Monte Carlo",
            moments.1 == 0,
            format!(
                "max |error| {:.2} SE over {settings} settings × {samples} samples; {} beyond 3 SE",
                moments.0, moments.1
            ),
        ),
        Check::new(
            "look-ahead posteriors vs Monte Carlo",
            posteriors.1 == 0 && errors == 0,
            format!(
                "max |error| {:.2} SE over {settings} settings × {samples} samples; {} beyond 3 SE, {errors} failures",
                posteriors.0, posteriors.1
            ),
        ),
    ]
}

/// Library acquisitions equal their two-branch enumeration to `1e-12` and are
/// never below `−1e-9`, on `n` random candidates with 5-point reference sets.
pub fn check_composition(n: usize, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (0.0f64, "");
    let mut lowest = f64::INFINITY;
    let mut errors = 0;
    for _ in 0..n {
        let p = RandomPosterior::draw(&mut rng, 5, 1.0);
        let c = rng.random_range(0.01..2.0);
        let oracle = compose(p.candidate, &p.reference, p.gamma, c);
        let Ok(lib) = library_composed(p.candidate, &p.reference, p.gamma, c) else {
            errors += 1;
            continue;
        };
        for ((name, want), (_, got)) in oracle.values().into_iter().zip(lib.values()) {
            let err = (want - got).abs();
            if err > worst.0 {
                worst = (err, name);
            }
            lowest = lowest.min(got);
        }
    }
    vec![
        Check::new(
            "acquisitions vs two-branch enumeration",
            worst.0 <= 1e-12 && errors == 0,
            format!(
                "max error {:.3e} ({}) over {n} inputs, {errors} failures (tol 1e-12)",
                worst.0, worst.1
            ),
        ),
        Check::new(
            "acquisitions nonnegative",
            lowest >= -1e-9,
            format!("minimum value {lowest:.3e} (tol −1e-9)"),
        ),
    ]
}

/// With zero candidate/reference covariance, every look-ahead acquisition is
/// zero to `1e-12`, on `n` random posteriors.
pub fn check_zero_information(n: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut errors = 0;
    for _ in 0..n {
        let p = RandomPosterior::draw(&mut rng, 5, 0.0);
        let (mu, var) = p.candidate;
        let terms: Result<Vec<LookaheadTerms>> = p
            .reference
            .iter()
            .map(|&(mu_q, var_q, _)| {
                LookaheadTerms::new(
                    &QueryPair {
                        mu_q,
                        var_q,
                        mu_star: mu,
                        var_star: var,
                        cov_qstar: 0.0,
                    },
                    p.gamma,
                )
            })
            .collect();
        let values = terms.and_then(|t| {
            Ok([
                local_sur(&t[0])?,
                local_mi(&t[0])?,
                global_sur(&t)?,
                global_mi(&t)?,
                eavc(&t, 1.0)?,
            ])
        });
        match values {
            Ok(v) => worst = v.iter().fold(worst, |w, x| w.max(x.abs())),
            Err(_) => errors += 1,
        }
    }
    Check::new(
        "zero covariance gives zero acquisition",
        worst <= 1e-12 && errors == 0,
        format!("max |value| {worst:.3e} over {n} posteriors, {errors} failures (tol 1e-12)"),
    )
}

/// Each problem's level set and its complement are nonempty on a Sobol probe,
/// and 2AFC problems stay at or above 0.5.
pub fn check_problems(probe: usize) -> Vec<Check> {
    PROBLEM_NAMES
        .iter()
        .map(|name| {
            let p = problem_by_name(name).expect("built-in problem");
            let b = p.bounds();
            let mut sobol = SobolStream::new(b.dim()).expect("supported dimension");
            let (mut below, mut min, mut max) = (0usize, f64::INFINITY, f64::NEG_INFINITY);
            for _ in 0..probe {
                let z = p.response(&b.from_unit(&sobol.next_point()));
                below += usize::from(z <= p.theta());
                min = min.min(z);
                max = max.max(z);
            }
            let floor_ok = !p.is_two_afc() || min >= 0.5 - 1e-12;
            Check::new(
                &format!("{name} level set"),
                below > 0 && below < probe && floor_ok && max <= 1.0 && min >= 0.0,
                format!("{below}/{probe} probe points below θ, range [{min:.4}, {max:.4}]"),
            )
        })
        .collect()
}

/// A quick pass over every check suite at reduced sizes.
pub fn selftest() -> Vec<Check> {
    let mut out = check_special_functions(200, 1);
    out.push(check_tower(2000, 2));
    out.extend(check_monte_carlo(5, 200_000, 3));
    out.extend(check_composition(500, 4));
    out.push(check_zero_information(500, 5));
    out.extend(check_problems(10_000));
    out
}
