use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use kslab::{
    disturbance, identity_cc_check, relation_suite, transform, Direction, LinOp,
};
use kslab_bench::{family, states};

fn bench_transform(c: &mut Criterion) {
    let mut group = c.benchmark_group("transform_roundtrip");
    for grid in [1024usize, 4096] {
        let fam = family(grid, 4);
        let psi = states(&fam).remove(0);
        group.bench_with_input(BenchmarkId::from_parameter(grid), &grid, |b, _| {
            b.iter(|| {
                let mom = transform(black_box(&psi), Direction::ToMomentum).unwrap();
                transform(&mom, Direction::ToPosition).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_apply(c: &mut Criterion) {
    let fam = family(2048, 4);
    let psi = states(&fam).remove(0);
    let mut group = c.benchmark_group("apply");
    group.bench_function("b1_momentum_diagonal", |b| {
        b.iter(|| fam.b1_op().apply_state(black_box(&psi)).unwrap())
    });
    group.bench_function("a2_sign_diagonal", |b| {
        b.iter(|| fam.a2_op().apply_state(black_box(&psi)).unwrap())
    });
    let chain = LinOp::product(vec![
        fam.a2_op().clone(),
        fam.b1_op().clone(),
        fam.a1_op().clone(),
        fam.b2n_op().clone(),
    ])
    .unwrap();
    group.bench_function("four_factor_chain", |b| {
        b.iter(|| chain.apply_state(black_box(&psi)).unwrap())
    });
    group.finish();
}

fn bench_disturbance(c: &mut Criterion) {
    let fam = family(2048, 8);
    let psi = states(&fam).remove(0);
    let delta = disturbance(fam.b1_op(), &fam.e2().as_slice()).unwrap();
    c.bench_function("disturbance_apply_n2048", |b| {
        b.iter(|| delta.apply_state(black_box(&psi)).unwrap())
    });
}

fn bench_suites(c: &mut Criterion) {
    let fam = family(1024, 4);
    let sts = states(&fam);
    c.bench_function("relation_suite_n1024", |b| {
        b.iter(|| relation_suite(black_box(&fam), black_box(&sts)).unwrap())
    });
    c.bench_function("identity_cc_n1024", |b| {
        b.iter(|| identity_cc_check(black_box(&fam), black_box(&sts)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_transform,
    bench_apply,
    bench_disturbance,
    bench_suites
);
criterion_main!(benches);
