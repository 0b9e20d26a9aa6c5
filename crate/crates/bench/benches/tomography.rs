use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dephtomo::channel::{default_candidate_times, extract_basis, DampingModel};
use dephtomo::decoherence::coefficient_matrix;
use dephtomo::operator::{hadamard_trace_transport, RANK_TOL};
use dephtomo::tomography::{
    minimal_observables, reconstruct_from_record, select_time_grid, simulate_measurements, DEFAULT_GRID_CANDIDATES,
};
use dephtomo::ReconstructionOptions;
use dephtomo_bench::*;

fn transport(c: &mut Criterion) {
    let mut group = c.benchmark_group("transport");
    for n in [2usize, 4, 8] {
        let m = random_matrices(1, n, n, 3);
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| hadamard_trace_transport(black_box(&m[0]), black_box(&m[1]), black_box(&m[2])).unwrap())
        });
    }
    group.finish();
}

fn coefficients(c: &mut Criterion) {
    let mut group = c.benchmark_group("coefficient_matrix");
    for (n, env) in [(2usize, 4usize), (3, 8), (4, 16)] {
        let model = random_decoherence_model(2, n, env);
        group.bench_with_input(BenchmarkId::new(format!("n{n}"), env), &model, |b, model| {
            b.iter(|| coefficient_matrix(model, black_box(1.3)).unwrap())
        });
    }
    group.finish();
}

fn extraction(c: &mut Criterion) {
    let mut group = c.benchmark_group("extract_basis");
    for (n, mu) in [(2usize, 3usize), (3, 7), (4, 13)] {
        let decomposed = random_channel(3, n, mu);
        let sampled = DampingModel::from_fn(n, move |t| dephtomo::channel::evaluate(&decomposed, t));
        let times = default_candidate_times(n, 10.0);
        group.bench_with_input(BenchmarkId::new(format!("n{n}"), mu), &sampled, |b, model| {
            b.iter(|| extract_basis(model, black_box(&times), RANK_TOL).unwrap())
        });
    }
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("reconstruct_from_record");
    for (n, mu) in [(2usize, 3usize), (3, 7), (4, 13)] {
        let model = random_channel(4, n, mu);
        let decomp = model.decomposition().unwrap().clone();
        let observables = minimal_observables(&gell_mann_observables(n), &decomp).unwrap().subset;
        let horizon = 3.0 / decomp.slowest_decay().unwrap();
        let grid = select_time_grid(&decomp, horizon, mu, DEFAULT_GRID_CANDIDATES, 0).unwrap();
        let record = simulate_measurements(&model, &random_state(5, n), &observables, &grid, 0.0, 0).unwrap();
        group.bench_with_input(BenchmarkId::new(format!("n{n}"), mu), &record, |b, record| {
            b.iter(|| reconstruct_from_record(record, &decomp, ReconstructionOptions::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, transport, coefficients, extraction, pipeline);
criterion_main!(benches);
