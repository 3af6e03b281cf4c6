use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use aztec_core::arith::{Backend, Rational};
use aztec_core::diamond::{CellGrid, CellWeights};
use aztec_core::exec::Exec;
use aztec_core::probs::prob_sweep_any;
use aztec_core::reduce::build_trace;
use aztec_core::regions::embed_fortress;
use aztec_core::shuffle::AnySampler;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn varied(n: usize) -> CellGrid<Rational> {
    CellGrid::from_fn(n, |r, c| {
        let k = ((r * 7 + c * 3) % 5) as i64;
        CellWeights::new(Rational::ratio(1 + k, 2), Rational::one(), Rational::ratio(3, 1 + k), Rational::ratio(2, 3))
    })
}

fn reduction(c: &mut Criterion) {
    let mut group = c.benchmark_group("reduce");
    for n in [40, 120] {
        let grid = embed_fortress(n, &Rational::ratio(1, 2), 0).target;
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(format!("float64/{name}"), n), &grid, |b, g| {
                b.iter(|| build_trace(black_box(g), Backend::Float64, exec).unwrap())
            });
        }
    }
    let grid = varied(16);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(format!("exact/{name}"), 16), &grid, |b, g| {
            b.iter(|| build_trace(black_box(g), Backend::ExactRational, exec).unwrap())
        });
    }
    group.finish();
}

fn probabilities(c: &mut Criterion) {
    let mut group = c.benchmark_group("probs");
    let grid = embed_fortress(120, &Rational::ratio(1, 2), 0).target;
    let trace = build_trace(&grid, Backend::Float64, Exec::Parallel).unwrap();
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(format!("float64/{name}"), 120), |b| {
            b.iter(|| prob_sweep_any(black_box(&trace), exec).unwrap())
        });
    }
    let trace = build_trace(&varied(12), Backend::ExactRational, Exec::Parallel).unwrap();
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(format!("exact/{name}"), 12), |b| {
            b.iter(|| prob_sweep_any(black_box(&trace), exec).unwrap())
        });
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_many");
    group.sample_size(10);
    let grid = embed_fortress(40, &Rational::ratio(1, 2), 0).target;
    let sampler = AnySampler::new(&build_trace(&grid, Backend::Float64, Exec::Parallel).unwrap()).unwrap();
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "64 draws"), |b| b.iter(|| sampler.sample_many(1, 64, exec)));
    }
    group.finish();
}

criterion_group!(benches, reduction, probabilities, sampling);
criterion_main!(benches);
