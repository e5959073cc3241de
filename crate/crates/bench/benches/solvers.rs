// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use grpda::prox::project_simplex;
use grpda::solvers::grpda_l_iterate;
use grpda::{LinearOperator, SeededRng, SolverState};
use grpda_benches::{lasso, matrix_game};

fn matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("matvec");
    for n in [100, 500, 1000] {
        let mut rng = SeededRng::from_seed(3);
        let k = LinearOperator::random_normal(n, n, &mut rng);
        let x = rng.unit_vector(n);
        group.bench_with_input(BenchmarkId::new("forward", n), &n, |b, _| b.iter(|| k.apply(black_box(&x))));
        group.bench_with_input(BenchmarkId::new("adjoint", n), &n, |b, _| b.iter(|| k.apply_adjoint(black_box(&x))));
    }
    group.finish();
}

fn simplex(c: &mut Criterion) {
    let mut group = c.benchmark_group("simplex_projection");
    for n in [100, 1000, 10_000] {
        let mut rng = SeededRng::from_seed(4);
        let u: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| project_simplex(black_box(&u))));
    }
    group.finish();
}

fn grpda_l_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("grpda_l_iteration");
    for n in [50, 200] {
        let f = matrix_game(n, 50);
        let fresh = || {
            let mut s = SolverState::new(&f.problem, f.x0.clone(), f.y0.clone(), f.config.tau0, f.config.beta);
            for _ in 0..20 {
                grpda_l_iterate(&f.problem, &mut s, &f.config).unwrap();
            }
            s
        };
        group.bench_with_input(BenchmarkId::new("matrix_game", n), &n, |b, _| {
            b.iter_batched(
                fresh,
                |mut s| grpda_l_iterate(&f.problem, &mut s, &f.config).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn affine_linesearch(c: &mut Criterion) {
    let mut group = c.benchmark_group("lasso_linesearch");
    let f = lasso(200, 400, 8);
    for (label, fast) in [("affine", true), ("plain", false)] {
        let fresh = || {
            let s = SolverState::new(&f.problem, f.x0.clone(), f.y0.clone(), f.config.tau0, f.config.beta);
            if fast {
                s
            } else {
                s.without_affine_fast_path()
            }
        };
        group.bench_function(label, |b| {
            b.iter_batched(
                fresh,
                |mut s| {
                    for _ in 0..10 {
                        grpda_l_iterate(&f.problem, &mut s, &f.config).unwrap();
                    }
                    s
                },
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, matvec, simplex, grpda_l_step, affine_linesearch);
criterion_main!(benches);
