use blse::oracle::check_problems;
use blse::problems::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

fn phi(x: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(x)
}

// Second implementation written from the printed formulas, sharing nothing
// with the library beyond the problem itself.
fn hartmann_reference(x: &[f64]) -> f64 {
    let alpha = [2.0, 2.2, 2.8, 3.0];
    let a = [
        [8.0, 3.0, 10.0, 3.5, 1.7, 6.0],
        [0.5, 8.0, 10.0, 1.0, 6.0, 9.0],
        [3.0, 3.5, 1.7, 8.0, 10.0, 6.0],
        [10.0, 6.0, 0.5, 8.0, 1.0, 9.0],
    ];
    let p = [
        [1312.0, 1696.0, 5569.0, 124.0, 8283.0, 5886.0],
        [2329.0, 4135.0, 8307.0, 3736.0, 1004.0, 9991.0],
        [2348.0, 1451.0, 3522.0, 2883.0, 3047.0, 6650.0],
        [4047.0, 8828.0, 8732.0, 5743.0, 1091.0, 381.0],
    ];
    let mut h = 1.0;
    for i in 0..4 {
        let mut e = 0.0;
        for j in 0..6 {
            let d = x[j] - p[i][j] * 1e-4;
            e += a[i][j] * d * d;
        }
        h -= alpha[i] * (-e).exp();
    }
    h
}

fn discrim8_reference(x: &[f64]) -> f64 {
    let (x1, x2, x3, x4, x5, x6, x7, x8) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]);
    let pi = std::f64::consts::PI;
    let c = (x3 / 2.0 * (1.0 - (3.0 / 5.0 * pi * x2 * x8 + x7).cos()) + x4)
        * (2.0 - x6 * (1.0 + (3.0 / 10.0 * pi * x2 * x8 + x7).sin()))
        - 1.0;
    0.5 + 0.5 * phi((x1 - c) / (x5 * (2.0 + c)))
}

#[test]
fn hartmann_at_origin() {
    let h = hartmann_reference(&[0.0; 6]);
    assert!((h - 0.971_388_490_068_674_2).abs() < 1e-12);
    assert!((hartmann6(&[0.0; 6]) - h).abs() < 1e-14);
    let z = binarized_hartmann6(&[0.0; 6]).unwrap();
    assert!((z - phi(3.0 * h - 2.0)).abs() < 1e-9);
    assert!((z - 0.819_685_047_495_482_2).abs() < 1e-12);
}

#[test]
fn hartmann_at_first_centre() {
    let x = [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886];
    let h = hartmann_reference(&x);
    assert!(h < 1.0 - 2.0);
    assert!((hartmann6(&x) - h).abs() < 1e-14);
    let z = binarized_hartmann6(&x).unwrap();
    assert!((z - 6.747_945_766_002_073e-8).abs() < 1e-18);
}

#[test]
fn hartmann_probabilities_in_open_unit_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..1000 {
        let x: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
        let z = binarized_hartmann6(&x).unwrap();
        assert!(z > 0.0 && z < 1.0);
        assert!((hartmann6(&x) - hartmann_reference(&x)).abs() < 1e-13);
    }
}

#[test]
fn discrim_highdim_matches_reference() {
    // Seed 20240101, 1000 uniform points in [-1, 1]^8.
    let mut rng = ChaCha8Rng::seed_from_u64(20240101);
    for _ in 0..1000 {
        let x: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let got = discrim_8d(&x).unwrap();
        let want = discrim8_reference(&x);
        assert!((got - want).abs() < 1e-9, "{x:?}: {got} vs {want}");
        assert!((0.5..=1.0).contains(&got));
    }
}

#[test]
fn discrim_lowdim_values() {
    assert_eq!(discrim_2d(&[-0.7, -1.0]).unwrap(), 0.5);
    assert!((discrim_2d(&[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let x1: f64 = rng.random_range(-1.0..1.0);
        let x2: f64 = rng.random_range(-1.0..1.0);
        let f = (1.0 + x2) / (0.05 + 0.4 * x1 * x1 * (0.2 * x1 - 1.0).powi(2));
        let z = discrim_2d(&[x1, x2]).unwrap();
        assert!((z - phi(f)).abs() < 1e-9);
        assert!((0.5..=1.0).contains(&z));
    }
}

#[test]
fn empirical_sampling_rate() {
    let problem = problem_by_name("hartmann6_binary").unwrap();
    let x = [0.3, 0.2, 0.5, 0.3, 0.3, 0.6];
    let p = problem.probability(&x).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = 100_000;
    let hits = (0..n).filter(|_| problem.sample(&x, &mut rng).unwrap()).count();
    let se = (p * (1.0 - p) / n as f64).sqrt();
    assert!(
        (hits as f64 / n as f64 - p).abs() < 3.0 * se,
        "p = {p}, rate = {}",
        hits as f64 / n as f64
    );
}

#[test]
fn sampling_is_reproducible_per_stream() {
    let problem = problem_by_name("discrim_highdim").unwrap();
    let x = [0.1; 8];
    let draw = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..64)
            .map(|_| problem.sample(&x, &mut rng).unwrap())
            .collect::<Vec<_>>()
    };
    assert_eq!(draw(3), draw(3));
}

#[test]
fn level_sets_nonempty_on_sobol_probe() {
    for check in check_problems(10_000) {
        assert!(check.passed, "{}: {}", check.name, check.detail);
    }
}
