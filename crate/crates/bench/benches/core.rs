use criterion::{criterion_group, criterion_main, Criterion};
use markoff_bench::{classical, generalized, maskit};
use markoff_core::identity::mcshane_sum;
use markoff_core::markoff::omega_leq;
use markoff_core::{Budget, FareyFraction};
use num_complex::Complex64;
use std::hint::black_box;

fn eval(c: &mut Criterion) {
    let m = maskit();
    let deep = FareyFraction::new(987, 1597).unwrap();
    let fan = FareyFraction::new(1, 100_000).unwrap();
    c.bench_function("eval/fibonacci_ratio", |b| b.iter(|| m.eval(black_box(deep))));
    c.bench_function("eval/long_fan_run", |b| b.iter(|| m.eval(black_box(fan))));
}

fn scans(c: &mut Criterion) {
    let m = maskit();
    c.bench_function("omega_leq/maskit_k2", |b| {
        b.iter(|| omega_leq(&m, black_box(2.0), Budget::default()))
    });
    let g = generalized();
    c.bench_function("omega_leq/generalized_k10", |b| {
        b.iter(|| omega_leq(&g, black_box(10.0), Budget::default()))
    });
}

fn sums(c: &mut Criterion) {
    let budget = Budget {
        max_fib: 60,
        ..Budget::default()
    };
    let m = classical();
    c.bench_function("mcshane/classical_1e-8", |b| {
        b.iter(|| mcshane_sum(&m, black_box(1e-8), budget))
    });
    let m = maskit();
    c.bench_function("mcshane/maskit_1e-5", |b| {
        b.iter(|| mcshane_sum(&m, black_box(1e-5), budget))
    });
}

fn kernels(c: &mut Criterion) {
    let g = generalized();
    let k = g.kernels();
    let x = Complex64::new(7.5, -3.25);
    c.bench_function("kernels/hbar", |b| b.iter(|| k.hbar(black_box(x))));
    c.bench_function("kernels/psi", |b| {
        b.iter(|| k.psi(black_box(x), black_box(x * 2.0), black_box(x + 1.0)))
    });
}

criterion_group!(benches, eval, scans, sums, kernels);
criterion_main!(benches);
