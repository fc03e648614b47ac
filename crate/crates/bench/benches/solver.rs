use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use warpcurv::{
    audit_profile, curvature_audit, scan_branches, solve_period, solve_period_with_table,
    ModelParams, PeriodTable,
};

fn params() -> ModelParams {
    ModelParams::new(5, 2.0, 2.0).unwrap()
}

fn table(c: &mut Criterion) {
    let p = params();
    c.bench_function("period_table_build", |b| {
        b.iter(|| PeriodTable::build(black_box(&p)).unwrap())
    });
    let t = PeriodTable::build(&p).unwrap();
    let target = 1.05 * p.threshold_period();
    c.bench_function("solve_energy", |b| {
        b.iter(|| t.solve_energy(black_box(target)).unwrap())
    });
}

fn solve(c: &mut Criterion) {
    let p = params();
    let target = 1.05 * p.threshold_period();
    let t = PeriodTable::build(&p).unwrap();
    let mut group = c.benchmark_group("solve");
    group.sample_size(20);
    group.bench_function("solve_period_512", |b| {
        b.iter(|| solve_period(black_box(target), &p, 512).unwrap())
    });
    group.bench_function("sample_with_table_512", |b| {
        b.iter(|| solve_period_with_table(black_box(target), &t, 512).unwrap())
    });
    group.finish();
}

fn audits(c: &mut Criterion) {
    let p = params();
    let prof = solve_period(1.05 * p.threshold_period(), &p, 512).unwrap();
    c.bench_function("audit_profile_512", |b| {
        b.iter(|| audit_profile(black_box(&prof)))
    });
    c.bench_function("curvature_audit_512", |b| {
        b.iter(|| curvature_audit(black_box(&prof), 2e-4).unwrap())
    });
}

fn bifurcation(c: &mut Criterion) {
    let p = params();
    let tmax = 3.5 * p.threshold_period();
    let mut group = c.benchmark_group("bifurcation");
    group.sample_size(10);
    group.bench_function("scan_branches_400", |b| {
        b.iter(|| scan_branches(black_box(tmax), 400, &p).unwrap())
    });
    group.finish();
}

criterion_group!(benches, table, solve, audits, bifurcation);
criterion_main!(benches);
