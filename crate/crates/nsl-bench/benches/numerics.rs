//! Hot-path benchmarks: the nonlocal convolution, one finite-volume step at
//! both orders, and the threshold box search.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use nsl_bench::{sine_state, smooth_profile};
use nsl_core::{convolve, general_lambda, nonlocal_derivatives, FluxModel, KernelSpec, VRange};

fn bench_convolution(c: &mut Criterion) {
    let (grid, u) = smooth_profile(1600);
    let constant = KernelSpec::constant(1.0, 1.0).unwrap();
    let linear = KernelSpec::linear(1.0).unwrap();
    c.bench_function("convolve constant n=1600 window=100", |b| {
        b.iter(|| convolve(&constant, &grid, black_box(&u)).unwrap())
    });
    c.bench_function("convolve linear n=1600 window=100", |b| {
        b.iter(|| convolve(&linear, &grid, black_box(&u)).unwrap())
    });
    c.bench_function("nonlocal derivatives n=1600 window=100", |b| {
        b.iter(|| nonlocal_derivatives(&constant, &grid, black_box(&u)).unwrap())
    });
}

fn bench_solver_step(c: &mut Criterion) {
    for order in [1u8, 2] {
        let (solver, state) = sine_state(800, order);
        c.bench_function(&format!("solver step order={order} n=800"), |b| {
            b.iter_batched(
                || state.clone(),
                |mut s| solver.step(&mut s, f64::INFINITY).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
}

fn bench_threshold_search(c: &mut Criterion) {
    let flux = FluxModel::arrhenius(1.0).unwrap();
    let kernel = KernelSpec::constant(1.0, 1.0).unwrap();
    c.bench_function("threshold box search res=301", |b| {
        b.iter(|| {
            general_lambda(&flux, &kernel, black_box(-1.0), 301, VRange::Explicit(1.0)).unwrap()
        })
    });
}

criterion_group!(benches, bench_convolution, bench_solver_step, bench_threshold_search);
criterion_main!(benches);
