use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tradeoff_bench::{basis_counts, basis_kernel, bb84, spread};
use tradeoff_core::qcore::von_neumann_entropy;
use tradeoff_core::solver::{solve_m, SimplexGrid};
use tradeoff_core::typicality::ConditionalSubspace;

fn entropy(c: &mut Criterion) {
    let mut g = c.benchmark_group("entropy");
    for d in [2, 4, 8] {
        let rho = spread(2 * d, d).average_state();
        g.bench_function(format!("jacobi_d{d}"), |b| {
            b.iter(|| von_neumann_entropy(black_box(&rho)))
        });
    }
    g.finish();
}

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_m");
    g.sample_size(20);
    let e = bb84();
    let grid = SimplexGrid::default_for(&e).unwrap();
    g.bench_function("bb84_r1", |b| b.iter(|| solve_m(black_box(&e), 1.0, &grid).unwrap()));
    let e3 = spread(3, 3);
    let grid3 = SimplexGrid::default_for(&e3).unwrap();
    g.bench_function("generic3_r0.5", |b| {
        b.iter(|| solve_m(black_box(&e3), 0.5, &grid3).unwrap())
    });
    g.finish();
}

fn projector(c: &mut Criterion) {
    let mut g = c.benchmark_group("projector_overlap");
    let sub = ConditionalSubspace::new(&bb84(), &basis_kernel()).unwrap();
    for n in [50, 200, 400] {
        let counts = basis_counts(n);
        g.bench_function(format!("bb84_n{n}"), |b| {
            b.iter(|| sub.overlap_from_counts(black_box(&counts), 10.0, 0.0).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, entropy, solve, projector);
criterion_main!(benches);
