use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use iqofdm::harness::{run_ber_sweep_with, Executor, Scheme, SimConfig};

fn bench_config() -> SimConfig {
    SimConfig {
        schemes: vec![Scheme::TdLsFdGe],
        snr_db: vec![10.0],
        frames: 128,
        early_stop: None,
        ..SimConfig::default()
    }
}

fn sweep(c: &mut Criterion) {
    let cfg = bench_config();
    let mut group = c.benchmark_group("ber_sweep_128_frames");
    group.sample_size(10);

    let seq = Executor::sequential();
    group.bench_function("sequential", |b| {
        b.iter(|| run_ber_sweep_with(black_box(&cfg), &seq).unwrap())
    });

    // Without the `parallel` feature this is the sequential path again.
    let par = Executor::new(0).unwrap();
    group.bench_function(format!("parallel_{}", par.workers()), |b| {
        b.iter(|| run_ber_sweep_with(black_box(&cfg), &par).unwrap())
    });
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
