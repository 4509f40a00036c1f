//! Parallel vs sequential throughput.
//!
//! `cargo bench -p treeld-core` measures the rayon build on all cores and on
//! a one-thread pool; `cargo bench -p treeld-core --no-default-features`
//! measures the sequential fallback under the same benchmark ids, so
//! criterion's saved baselines compare the two directly.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use treeld_core::experiments::{run_simulation, ExperimentConfig};
use treeld_core::learner::learn_mwst;
use treeld_core::oracle::{exact_error_p3, extremal_census};
use treeld_core::sampling::{pair_stats, sample_batch};
use treeld_core::tree::make_star;
use treeld_core::{with_threads, TiePolicy, WeightRule};

const TRIALS: u64 = 20_000;

fn modes() -> Vec<(&'static str, Option<usize>)> {
    if cfg!(feature = "parallel") {
        vec![("rayon", None), ("rayon-1-thread", Some(1))]
    } else {
        vec![("sequential", None)]
    }
}

fn simulation(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate_star10_n1000");
    g.sample_size(10).throughput(Throughput::Elements(TRIALS));
    let cfg = ExperimentConfig {
        structure: "star".into(),
        theta: 0.4,
        q: 0.02,
        n_list: vec![1000],
        min_errors: u64::MAX,
        max_trials: TRIALS,
        ..Default::default()
    };
    for (name, threads) in modes() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| with_threads(threads, || run_simulation(black_box(&cfg)).unwrap()))
        });
    }
    g.finish();
}

fn enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumeration");
    g.sample_size(10);
    for (name, threads) in modes() {
        g.bench_function(BenchmarkId::new("exact_error_p3_n14", name), |b| {
            b.iter(|| with_threads(threads, || exact_error_p3(0.3, 0.0, black_box(14), TiePolicy::RandomTieBreak).unwrap()))
        });
        g.bench_function(BenchmarkId::new("extremal_p7", name), |b| {
            b.iter(|| with_threads(threads, || extremal_census(black_box(7)).unwrap()))
        });
    }
    g.finish();
}

fn kernels(c: &mut Criterion) {
    let t = make_star(10).unwrap();
    let batch = sample_batch(&t, 0.4, 1000, 1).unwrap();
    let stats = pair_stats(&batch);
    let mut g = c.benchmark_group("trial_kernels_p10_n1000");
    g.bench_function("sample", |b| b.iter(|| sample_batch(&t, 0.4, black_box(1000), 1).unwrap()));
    g.bench_function("pair_stats", |b| b.iter(|| pair_stats(black_box(&batch))));
    g.bench_function("learn_agreement", |b| {
        b.iter(|| learn_mwst(black_box(&stats), WeightRule::Agreement, TiePolicy::RandomTieBreak, 1))
    });
    g.bench_function("learn_mi", |b| {
        b.iter(|| learn_mwst(black_box(&stats), WeightRule::MutualInformation, TiePolicy::RandomTieBreak, 1))
    });
    g.finish();
}

criterion_group!(benches, simulation, enumeration, kernels);
criterion_main!(benches);
