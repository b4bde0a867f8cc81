//! Shared fixtures for the benchmarks.

use blse::acquisition::ReferenceSet;
use blse::optim::SobolStream;
use blse::specfun::norm_cdf;
use blse::surrogate::{fit, Bounds, Dataset, GpModel, SurrogateConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A model fitted to `n` synthetic observations on `[-1, 1]^d` and a
/// `g`-point scrambled Sobol reference set.
pub fn fitted_model(n: usize, d: usize, g: usize) -> (GpModel, ReferenceSet) {
    let mut rng = ChaCha8Rng::seed_from_u64((n * 31 + d) as u64);
    let bounds = Bounds::cube(d, -1.0, 1.0).expect("valid bounds");
    let mut data = Dataset::new(bounds.clone());
    for _ in 0..n {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y = rng.random::<f64>() < norm_cdf(3.0 * x[0] - 2.0 * x[1] * x[1]);
        data.push(x, y).expect("point in bounds");
    }
    let model = fit(&data, &SurrogateConfig::default(), None, &mut rng).expect("fit");
    let unit = SobolStream::scrambled(d, 5).expect("dimension").draw(g);
    let refset = ReferenceSet::from_unit(&unit, &bounds).expect("reference set");
    (model, refset)
}
