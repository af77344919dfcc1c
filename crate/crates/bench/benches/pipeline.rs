use std::hint::black_box;

use corrdeco_bench::mixed_qubits;
use corrdeco_core::dynamics::linspace;
use corrdeco_core::{
    build_br_generator, build_secular_generator, positivity_audit, propagate, DensityMatrix, PhenomenologicalKind,
    SpectralModel,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn generators(c: &mut Criterion) {
    let model = SpectralModel::gaussian(0.5).with_strength(0.01);
    let mut g = c.benchmark_group("generator");
    for n in [2, 3, 4] {
        let sys = mixed_qubits(n);
        g.bench_with_input(BenchmarkId::new("bloch-redfield", n), &sys, |b, s| {
            b.iter(|| build_br_generator(black_box(s), &model).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("secular", n), &sys, |b, s| {
            b.iter(|| build_secular_generator(black_box(s), &model, None, false).unwrap())
        });
    }
    g.finish();
}

fn propagation(c: &mut Criterion) {
    let model = SpectralModel::exponential(1.0).with_strength(0.01);
    let times = linspace(50.0, 201);
    let mut g = c.benchmark_group("propagate");
    for n in [2, 3] {
        let gen = build_br_generator(&mixed_qubits(n), &model).unwrap().superop;
        let rho = DensityMatrix::maximally_coherent(1 << n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &gen, |b, gen| {
            b.iter(|| propagate(black_box(gen), &rho, &times).unwrap())
        });
    }
    g.finish();
}

fn audits(c: &mut Criterion) {
    let mut g = c.benchmark_group("positivity-audit");
    for n in [8, 64] {
        g.bench_with_input(BenchmarkId::new("exponential", n), &n, |b, &n| {
            b.iter(|| positivity_audit(PhenomenologicalKind::Exponential { a: 0.3 }, black_box(n), 1e-9).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("step", n), &n, |b, &n| {
            b.iter(|| positivity_audit(PhenomenologicalKind::Step { width: 2 }, black_box(n), 1e-9).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, generators, propagation, audits);
criterion_main!(benches);
