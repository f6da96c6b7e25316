// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ddqe_bench::{central_spin, correlator, grid_state, spinor};
use ddqe_core::dirac::{disorder_kernels, evolve_characteristic, grid_evolve, KernelMode};
use ddqe_core::{
    build_lindblad, build_redfield, haar_unitary, integrate, mc_average_evolution, Expectation, IntegratorSpec,
    KernelGrid, Reduction, RngStream,
};

fn generators(c: &mut Criterion) {
    let (ens, rho0) = central_spin();
    let grid = KernelGrid::for_step(10.0, 0.01);
    c.bench_function("build_redfield/central_spin_t10", |b| {
        b.iter(|| build_redfield(black_box(&ens), grid, Expectation::ClosedForm).unwrap())
    });
    c.bench_function("build_lindblad/central_spin_t10", |b| {
        b.iter(|| build_lindblad(black_box(&ens), grid, Expectation::ClosedForm).unwrap())
    });
    let g = build_lindblad(&ens, grid, Expectation::ClosedForm).unwrap();
    c.bench_function("integrate/rk4_1000_steps", |b| {
        b.iter(|| integrate(black_box(&g), &rho0, IntegratorSpec::new(0.01, 10.0)).unwrap())
    });
}

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("haar_unitary");
    for d in [2usize, 4, 8] {
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, &d| {
            let mut rng = RngStream::new(1, 0);
            b.iter(|| haar_unitary(d, &mut rng).unwrap())
        });
    }
    group.finish();
    let (ens, rho0) = central_spin();
    let times: Vec<f64> = (0..=60).map(|k| 0.1 * k as f64).collect();
    c.bench_function("mc_average_evolution/k256", |b| {
        b.iter(|| mc_average_evolution(&ens, &rho0, &times, 256, &RngStream::new(2, 0), Reduction::Serial).unwrap())
    });
}

fn dirac(c: &mut Criterion) {
    let kernels = disorder_kernels(&correlator(), 1.0, 20.0, KernelMode::Exact).unwrap();
    let mut group = c.benchmark_group("evolve_characteristic");
    group.sample_size(10);
    for n in [65usize, 129] {
        let chi0 = spinor(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &chi0, |b, chi0| {
            b.iter(|| evolve_characteristic(chi0, &kernels, 20.0).unwrap())
        });
    }
    group.finish();
    let state = grid_state(3);
    let mut group = c.benchmark_group("grid_evolve");
    group.sample_size(10);
    group.bench_function("n4096_100_steps", |b| b.iter(|| grid_evolve(black_box(&state), 0.025, 100, 100).unwrap()));
    group.finish();
}

criterion_group!(benches, generators, sampling, dirac);
criterion_main!(benches);
