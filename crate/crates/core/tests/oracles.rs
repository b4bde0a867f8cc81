use blse::acquisition::{bald, eavc, global_mi, global_sur, local_mi, local_sur, straddle_z};
use blse::lookahead::{lookahead_posteriors, z_moments, LookaheadTerms, QueryPair};
use blse::oracle::{compose, library_composed, mc_lookahead, mc_z_moments, Estimate};
use blse::specfun::binary_entropy;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

const SAMPLES: usize = 10_000_000;

#[test]
fn z_moments_match_simulation() {
    let (mean, var) = z_moments(0.7, 1.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (em, ev) = mc_z_moments(0.7, 1.3, SAMPLES, &mut rng);
    assert!(em.z_score(mean) < 3.0, "mean {mean} vs {em:?}");
    assert!(ev.z_score(var) < 3.0, "variance {var} vs {ev:?}");
}

#[test]
fn lookahead_matches_simulation() {
    let pair = QueryPair {
        mu_q: 0.0,
        var_q: 1.0,
        mu_star: 0.0,
        var_star: 1.0,
        cov_qstar: 0.8,
    };
    let post = lookahead_posteriors(&LookaheadTerms::new(&pair, 0.674).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (pi1, pi0, p1) = mc_lookahead(&pair, 0.674, SAMPLES, &mut rng);
    assert!(pi1.z_score(post.pi_1) < 3.0, "{} vs {pi1:?}", post.pi_1);
    assert!(pi0.z_score(post.pi_0) < 3.0, "{} vs {pi0:?}", post.pi_0);
    assert!(p1.z_score(post.p1) < 3.0);
    // Observing a success raises f, so the sublevel probability drops.
    assert!(post.pi_1 < 0.75 && post.pi_0 > 0.75);
}

#[test]
fn bald_matches_simulation() {
    let (mu, sigma) = (0.4, 1.1);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..SAMPLES {
        let e: f64 = StandardNormal.sample(&mut rng);
        let h = binary_entropy(normal.cdf(mu + sigma * e));
        s += h;
        s2 += h * h;
    }
    let n = SAMPLES as f64;
    let mean_h = s / n;
    let se = ((s2 / n - mean_h * mean_h) / n).sqrt();
    let marginal = binary_entropy(normal.cdf(mu / (1.0f64 + sigma * sigma).sqrt()));
    let est = Estimate {
        value: marginal - mean_h,
        se,
    };
    let got = bald(mu, sigma).unwrap();
    assert!(est.z_score(got) < 3.0, "{got} vs {est:?}");
}

#[test]
fn single_reference_at_candidate_reduces_to_local() {
    for &(mu, var, gamma) in &[(0.3, 0.8, 0.0), (-1.2, 2.5, 0.674), (2.0, 0.1, 1.5)] {
        let t = LookaheadTerms::new(&QueryPair::at_candidate(mu, var), gamma).unwrap();
        assert!((global_sur(&[t]).unwrap() - local_sur(&t).unwrap()).abs() < 1e-12);
        assert!((global_mi(&[t]).unwrap() - local_mi(&t).unwrap()).abs() < 1e-12);
        let post = lookahead_posteriors(&t).unwrap();
        let pi = t.current();
        let change = post.p1 * (post.pi_1 - pi).abs() + (1.0 - post.p1) * (post.pi_0 - pi).abs();
        assert!((eavc(&[t], 0.37).unwrap() - 0.37 * change).abs() < 1e-12);
    }
}

#[test]
fn zero_covariance_leaves_straddle_alone() {
    let reference = [(0.2, 1.0, 0.0), (-0.5, 0.4, 0.0)];
    let lib = library_composed((0.1, 0.9), &reference, 0.3, 1.0).unwrap();
    let brute = compose((0.1, 0.9), &reference, 0.3, 1.0);
    assert!(lib.global_sur.abs() < 1e-12 && lib.global_mi.abs() < 1e-12 && lib.eavc.abs() < 1e-12);
    assert!(brute.global_sur.abs() < 1e-12);
    let s = straddle_z(0.1, 0.9f64.sqrt(), 0.75, 1.96).unwrap();
    assert!(s.is_finite() && s > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn composition_matches_enumeration(
        mu in -2.5..2.5f64,
        var in 0.05..4.0f64,
        gamma in -2.0..2.0f64,
        refs in prop::collection::vec((-3.0..3.0f64, 0.05..4.0f64, -0.99..0.99f64), 1..6),
        c in 0.01..2.0f64,
    ) {
        let reference: Vec<(f64, f64, f64)> = refs
            .iter()
            .map(|&(m, v, r)| (m, v, r * (v * var).sqrt()))
            .collect();
        let lib = library_composed((mu, var), &reference, gamma, c).unwrap();
        let brute = compose((mu, var), &reference, gamma, c);
        for ((name, a), (_, b)) in lib.values().into_iter().zip(brute.values()) {
            prop_assert!((a - b).abs() < 1e-12, "{name}: {a} vs {b}");
            prop_assert!(a >= -1e-9, "{name}: {a}");
        }
    }
}
