use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ricci_bench::evolved_band;
use ricci_core::analysis::{check_parallel_bounds, solve_potential};
use ricci_core::solver::{rhs, stable_dt, step_explicit, step_implicit, StepperConfig};
use ricci_core::solver::TraceRecord;

fn steps(c: &mut Criterion) {
    let mut g = c.benchmark_group("step");
    let cfg = StepperConfig::implicit();
    for n in [64usize, 256, 1024] {
        let s = evolved_band(n, 0.1);
        let dt = stable_dt(&s, 0.25);
        g.bench_with_input(BenchmarkId::new("rhs", n), &s, |b, s| b.iter(|| rhs(black_box(s))));
        g.bench_with_input(BenchmarkId::new("explicit_heun", n), &s, |b, s| {
            b.iter(|| step_explicit(black_box(s), dt))
        });
        g.bench_with_input(BenchmarkId::new("implicit_euler", n), &s, |b, s| {
            b.iter(|| step_implicit(black_box(s), 1e-3, &cfg).unwrap())
        });
    }
    g.finish();
}

fn diagnostics(c: &mut Criterion) {
    let mut g = c.benchmark_group("diagnostics");
    for n in [256usize, 1024] {
        let s = evolved_band(n, 0.1);
        g.bench_with_input(BenchmarkId::new("observe", n), &s, |b, s| b.iter(|| TraceRecord::observe(black_box(s), 0, 0.0)));
        g.bench_with_input(BenchmarkId::new("solve_potential", n), &s, |b, s| b.iter(|| solve_potential(black_box(s))));
        g.bench_with_input(BenchmarkId::new("parallel_bounds", n), &s, |b, s| {
            b.iter(|| check_parallel_bounds(black_box(s)))
        });
    }
    g.finish();
}

criterion_group!(benches, steps, diagnostics);
criterion_main!(benches);
