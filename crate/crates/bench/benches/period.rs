use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use warpcurv::{
    integrate_until_section, period_quadrature, Crossing, IntegratorConfig, PhaseState,
};
use warpcurv_bench::{energy, reference_params};

fn quadrature(c: &mut Criterion) {
    let mut group = c.benchmark_group("period_quadrature");
    for (name, p) in reference_params() {
        for s in [1e-6, 0.5, 1.0 - 1e-6] {
            let e = energy(&p, s);
            group.bench_with_input(BenchmarkId::new(name, s), &e, |b, &e| {
                b.iter(|| period_quadrature(black_box(e), &p).unwrap())
            });
        }
    }
    group.finish();
}

fn return_map(c: &mut Criterion) {
    let mut group = c.benchmark_group("return_map");
    for (name, p) in reference_params() {
        let cfg = IntegratorConfig::for_params(&p);
        let o = period_quadrature(energy(&p, 0.5), &p).unwrap();
        group.bench_function(name, |b| {
            b.iter(|| {
                integrate_until_section(
                    black_box(PhaseState::new(0.0, o.b, 0.0)),
                    Crossing::Downward,
                    &cfg,
                    &p,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, quadrature, return_map);
criterion_main!(benches);
