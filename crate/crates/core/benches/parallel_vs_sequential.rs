//! Rayon fan-out against the sequential path on the Monte-Carlo and
//! enumeration kernels. Both paths produce identical results; only the
//! wall time differs.
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use cslab_core::bos::{fourier_system, gaussian_matrix, SamplingMode};
use cslab_core::experiments::{run_experiment, ExperimentConfig, ExperimentId, ExperimentParams, Fig2Params};
use cslab_core::metrics::{joint_statistics, rip_bruteforce, ColumnEnsemble};
use cslab_core::numerics::RngStream;
use cslab_core::par;

fn both<R>(c: &mut Criterion, group: &str, f: impl Fn() -> R) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    g.bench_function(BenchmarkId::from_parameter("parallel"), |b| b.iter(|| black_box(f())));
    g.bench_function(BenchmarkId::from_parameter("sequential"), |b| {
        b.iter(|| par::sequential(|| black_box(f())))
    });
    g.finish();
}

fn ensemble(c: &mut Criterion) {
    let sys = fourier_system(128).unwrap();
    let ens = ColumnEnsemble::sampled(&sys, 32, SamplingMode::Iid, &RngStream::new(1, 0), 200).unwrap();
    both(c, "coherence_200_trials_n128_m32", || joint_statistics(&ens, true).unwrap());
}

fn rip(c: &mut Criterion) {
    let a = gaussian_matrix(20, 40, &RngStream::new(2, 0)).unwrap();
    both(c, "rip_gaussian_20x40_s3", || rip_bruteforce(&a, 3).unwrap());
}

fn fig2(c: &mut Criterion) {
    let mut cfg = ExperimentConfig::default_for(ExperimentId::Fig2);
    cfg.trials = 50;
    cfg.experiment = ExperimentParams::Fig2(Fig2Params {
        n_values: vec![4, 8, 16, 32, 64],
        ..Fig2Params::default()
    });
    both(c, "fig2_50_trials", || run_experiment(&cfg).unwrap());
}

criterion_group!(benches, ensemble, rip, fig2);
criterion_main!(benches);
