use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use hoho_bench::fixture;
use hoho_core::optimize::minimize_energy;
use hoho_core::simulator::{energy_and_gradient, prepare_state, GradientMode};
use hoho_core::{HomotopyHamiltonian, OptimizerConfig};

fn state_preparation(c: &mut Criterion) {
    let mut group = c.benchmark_group("prepare_state");
    for n in [8, 12, 16] {
        let (d, p) = fixture(n, 5, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| prepare_state(black_box(&p), &d).unwrap())
        });
    }
    group.finish();
}

fn gradients(c: &mut Criterion) {
    let mut group = c.benchmark_group("energy_and_gradient");
    let (d, p) = fixture(12, 5, 2);
    for (name, mode) in [("recompute", GradientMode::Recompute), ("stored", GradientMode::Stored)] {
        group.bench_function(name, |b| b.iter(|| energy_and_gradient(black_box(&p), 0.5, &d, mode).unwrap()));
    }
    group.finish();
}

fn eigenvalues(c: &mut Criterion) {
    let mut group = c.benchmark_group("extreme_eigenvalues");
    group.sample_size(20);
    for n in [8, 10, 12] {
        let (d, _) = fixture(n, 1, 3);
        let h = HomotopyHamiltonian::new(0.5, &d).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| h.extreme_eigenvalues(1e-10).unwrap())
        });
    }
    group.finish();
}

fn optimization(c: &mut Criterion) {
    let mut group = c.benchmark_group("minimize_energy");
    group.sample_size(10);
    let (d, p) = fixture(8, 3, 4);
    group.bench_function("n8_L3", |b| {
        b.iter(|| minimize_energy(black_box(&p), 1.0, &d, &OptimizerConfig::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, state_preparation, gradients, eigenvalues, optimization);
criterion_main!(benches);
