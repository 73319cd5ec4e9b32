use criterion::{criterion_group, criterion_main, Criterion};
use erg_phase::{
    dual_of, maximizers, transition_point, ChainState, EdgeWeightDistribution, ModelParams, SubgraphSpec,
};
use std::hint::black_box;

fn laws() -> Vec<(&'static str, EdgeWeightDistribution)> {
    vec![
        ("bernoulli", EdgeWeightDistribution::bernoulli(0.5).unwrap()),
        ("uniform", EdgeWeightDistribution::uniform()),
        ("beta22", EdgeWeightDistribution::beta(2.0, 2.0).unwrap()),
    ]
}

fn cumulant(c: &mut Criterion) {
    for (name, d) in laws() {
        c.bench_function(&format!("cumulant_derivatives/{name}"), |b| {
            b.iter(|| d.cumulant_derivatives(black_box(3.7)).unwrap())
        });
    }
}

fn legendre(c: &mut Criterion) {
    for (name, d) in laws() {
        c.bench_function(&format!("dual_of/{name}"), |b| b.iter(|| dual_of(&d, black_box(0.83)).unwrap()));
    }
}

fn variational(c: &mut Criterion) {
    let pr = ModelParams::new(-8.0, 8.0, 2).unwrap();
    for (name, d) in laws() {
        c.bench_function(&format!("maximizers/{name}"), |b| {
            b.iter(|| maximizers(&d, black_box(&pr), 1e-10).unwrap())
        });
    }
    let mut g = c.benchmark_group("transition_point");
    g.sample_size(10);
    for (name, d) in laws() {
        g.bench_function(name, |b| b.iter(|| transition_point(&d, 2, black_box(-8.0)).unwrap()));
    }
    g.finish();
}

fn sampler(c: &mut Criterion) {
    let d = EdgeWeightDistribution::uniform();
    for (h2, p) in [(SubgraphSpec::TwoStar, 2), (SubgraphSpec::Triangle, 3)] {
        let pr = ModelParams::new(0.5, 0.5, p).unwrap();
        let mut s = ChainState::new(&d, h2.clone(), 100, 1).unwrap();
        c.bench_function(&format!("mh_step/{h2}/n100"), |b| b.iter(|| s.mh_step(&d, &pr)));
    }
}

criterion_group!(benches, cumulant, legendre, variational, sampler);
criterion_main!(benches);
