use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ringbump::circulant::{eigen_dft, eigen_dft_direct, solve_tprime};
use ringbump::errfield::{error_norm, ErrorField};
use ringbump::reduced::ReducedSystem;
use ringbump::specfun::condition_margin;
use ringbump::Configuration;
use ringbump_bench::{params, reduced_matrix, rhs};

fn circulant_spectrum(c: &mut Criterion) {
    let mut group = c.benchmark_group("circulant_spectrum");
    for k in [16, 64, 256] {
        let t = reduced_matrix(k).unwrap();
        group.bench_with_input(BenchmarkId::new("fft", k), &t.a1, |b, a| {
            b.iter(|| eigen_dft(black_box(a)))
        });
        group.bench_with_input(BenchmarkId::new("direct", k), &t.a1, |b, a| {
            b.iter(|| eigen_dft_direct(black_box(a)))
        });
    }
    group.finish();
}

fn constrained_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_tprime");
    for k in [16, 64, 256] {
        let t = reduced_matrix(k).unwrap();
        let b = rhs(k);
        group.bench_with_input(BenchmarkId::from_parameter(k), &b, |bench, b| {
            bench.iter(|| solve_tprime(&t, black_box(b)).unwrap())
        });
    }
    group.finish();
}

fn condition_check(c: &mut Criterion) {
    let mut group = c.benchmark_group("condition_margin");
    group.sample_size(20);
    for n in [5, 12, 48] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| condition_margin(n, 500).unwrap())
        });
    }
    group.finish();
}

fn sampled_error_norm(c: &mut Criterion) {
    let k = 16;
    let sys = ReducedSystem::new(&params(k)).unwrap();
    let field = ErrorField::from_system(&sys, &Configuration::zeros(k, 0.0)).unwrap();
    let mut group = c.benchmark_group("error_norm");
    group.sample_size(10);
    group.bench_function("k16_10000", |b| b.iter(|| error_norm(&field, 10_000, 7)));
    group.finish();
}

criterion_group!(
    benches,
    circulant_spectrum,
    constrained_solve,
    condition_check,
    sampled_error_norm
);
criterion_main!(benches);
