//! Sequential vs rayon execution of the data-parallel parts: cost-matrix
//! construction, the oracle cross-check batch and a small K sweep.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use facility_planner::io::generate_synthetic;
use facility_planner::model::{build_cost_matrix_with, DepotSet, Point2};
use facility_planner::verify::cross_check;
use facility_planner::{sweep_k, BalanceMode, Execution, RunConfig};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn cost_matrix(c: &mut Criterion) {
    let data = generate_synthetic(25_000, 40, 3.0, 42).unwrap();
    let depots = DepotSet::new(
        (0..10)
            .map(|j| Point2::new(-150.0 + 30.0 * j as f64, 10.0 * (j as f64).sin()))
            .collect(),
    )
    .unwrap();
    let mut group = c.benchmark_group("cost_matrix_25000x10");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                build_cost_matrix_with(black_box(data.points()), &depots, Default::default(), exec)
            })
        });
    }
    group.finish();
}

fn oracle_batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_cross_check");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| cross_check(40, 10, black_box(7), exec).unwrap())
        });
    }
    group.finish();
}

fn k_sweep(c: &mut Criterion) {
    let data = generate_synthetic(2_000, 20, 3.0, 42).unwrap();
    let ks: Vec<usize> = (3..=10).collect();
    let mut group = c.benchmark_group("sweep_k_2000");
    group.sample_size(10);
    for (name, exec) in MODES {
        let config = RunConfig {
            balance_mode: BalanceMode::WithinOne,
            execution: exec,
            ..RunConfig::new(3)
        };
        group.bench_with_input(BenchmarkId::new(name, ks.len()), &ks, |b, ks| {
            b.iter(|| sweep_k(&data, ks, &config))
        });
    }
    group.finish();
}

criterion_group!(benches, cost_matrix, oracle_batch, k_sweep);
criterion_main!(benches);
