//! Benchmarks for the functional pipeline: one block integral, the closed
//! form, and a small Monte-Carlo run.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use testvector_bench::{eval_point, params, quadrature, twist, BENCH_SEED};
use testvector_core::{hecke_integral, lambda_exact, lambda_montecarlo, Combo};

fn bench_block_integral(c: &mut Criterion) {
    let (chi, s, quad) = (twist(), eval_point(), quadrature());
    c.bench_function("block ray integral (4000-node trapezoid)", |b| {
        b.iter(|| hecke_integral(black_box(5), 2, &chi, s, Combo::Symmetrized, &quad).unwrap())
    });
}

fn bench_closed_form(c: &mut Criterion) {
    let p = params(&[2, 1, 1, 0]);
    let (chi, s, quad) = (twist(), eval_point(), quadrature());
    c.bench_function("functional closed form n=2", |b| {
        b.iter(|| lambda_exact(black_box(&p), &chi, s, &quad).unwrap())
    });
}

fn bench_montecarlo(c: &mut Criterion) {
    let p = params(&[2, -2]);
    let (chi, s, quad) = (twist(), eval_point(), quadrature());
    c.bench_function("monte-carlo 2000 samples n=1", |b| {
        b.iter(|| lambda_montecarlo(black_box(&p), &chi, s, 2000, BENCH_SEED, &quad).unwrap())
    });
}

criterion_group!(functional, bench_block_integral, bench_closed_form, bench_montecarlo);
criterion_main!(functional);
