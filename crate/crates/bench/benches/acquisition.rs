use std::hint::black_box;

use bernoulli_lse_bench::fitted_model;
use blse::acquisition::{Acquisition, AcquisitionKind};
use blse::optim::{select_next, OptimizerBudget, SobolStream};
use criterion::{criterion_group, criterion_main, Criterion};

const KINDS: [AcquisitionKind; 4] = [
    AcquisitionKind::GlobalSUR,
    AcquisitionKind::GlobalMI,
    AcquisitionKind::EAVC,
    AcquisitionKind::LocalMI,
];

fn evaluate(c: &mut Criterion) {
    let (model, refset) = fitted_model(150, 2, 500);
    let mut group = c.benchmark_group("evaluate n=150 |G|=500");
    for kind in KINDS {
        let acq = Acquisition::new(kind, &model, Some(&refset), 0.75).unwrap();
        group.bench_function(kind.to_string(), |b| {
            b.iter(|| acq.evaluate(black_box(&[0.1, -0.2])).unwrap())
        });
    }
    group.finish();
}

fn maximize(c: &mut Criterion) {
    let (model, refset) = fitted_model(250, 2, 500);
    let mut group = c.benchmark_group("maximize n=250 |G|=500");
    group.sample_size(10);
    for kind in KINDS {
        group.bench_function(kind.to_string(), |b| {
            b.iter(|| {
                let mut quasi = SobolStream::new(2).unwrap();
                select_next(
                    kind,
                    &model,
                    Some(&refset),
                    0.75,
                    &OptimizerBudget::default(),
                    1,
                    &mut quasi,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, evaluate, maximize);
criterion_main!(benches);
