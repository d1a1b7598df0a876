use std::hint::black_box;

use beamsched::game::{is_p_matrix, parallel_update};
use beamsched_bench::{random_game, random_start};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn best_response_map(c: &mut Criterion) {
    let mut g = c.benchmark_group("best_response_map");
    for m in [2, 10, 20] {
        let game = random_game(m, 0.1, 1);
        let p = random_start(m, 1);
        g.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| game.best_response_map(black_box(&p)))
        });
    }
    g.finish();
}

fn parallel(c: &mut Criterion) {
    let mut g = c.benchmark_group("parallel_update");
    for m in [2, 10, 20] {
        let game = random_game(m, 0.1, 2);
        let p = random_start(m, 2);
        g.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| parallel_update(&game, black_box(p.clone()), 1e-6, 50))
        });
    }
    g.finish();
}

fn p_matrix(c: &mut Criterion) {
    let mut g = c.benchmark_group("is_p_matrix");
    g.sample_size(20);
    for m in [4, 10, 14] {
        let q = random_game(m, 1e-4, 3).q_matrix().unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| is_p_matrix(black_box(&q.0)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, best_response_map, parallel, p_matrix);
criterion_main!(benches);
