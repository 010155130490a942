//! Criterion benchmarks for the processing and model hot paths:
//! FFT, raw-signal -> cube processing, spectrogram extraction, cube
//! projection, eval-mode inference and one training step.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trident_core::projection::orthogonal_project;
use trident_core::rdp::{range_doppler_process, spectrogram, RdpOptions};
use trident_core::FftPlan;

fn bench_fft(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for len in [64usize, 1024] {
        let plan = FftPlan::new(len).unwrap();
        let input: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        c.bench_function(&format!("fft_{len}"), |b| {
            b.iter_batched_ref(
                || input.clone(),
                |buf| plan.forward(black_box(buf)).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
}

fn bench_range_doppler_process(c: &mut Criterion) {
    let raw = trident_bench::raw_signal();
    let plain = RdpOptions::default();
    let filtered = RdpOptions { clutter_filter: true, ..RdpOptions::default() };
    c.bench_function("range_doppler_process_16x64x32", |b| {
        b.iter(|| range_doppler_process(black_box(&raw), &plain).unwrap())
    });
    c.bench_function("range_doppler_process_clutter_filtered", |b| {
        b.iter(|| range_doppler_process(black_box(&raw), &filtered).unwrap())
    });
}

fn bench_spectrogram(c: &mut Criterion) {
    let raw = trident_bench::raw_signal();
    c.bench_function("spectrogram_512_chirps_w32_h16", |b| {
        b.iter(|| spectrogram(black_box(&raw), 32, 16).unwrap())
    });
}

fn bench_projection(c: &mut Criterion) {
    let cube = trident_bench::cube();
    c.bench_function("orthogonal_project_16x64x32", |b| {
        b.iter(|| orthogonal_project(black_box(&cube)))
    });
}

fn bench_model(c: &mut Criterion) {
    let model = trident_bench::model();
    let triples = trident_bench::triples(4);
    let refs: Vec<_> = triples.iter().collect();
    let one = &refs[..1];
    c.bench_function("model_forward_eval_single", |b| {
        b.iter(|| model.forward_eval(black_box(one)).unwrap())
    });

    let mut train_model = trident_bench::model();
    let labels = [0usize, 1, 2, 3];
    c.bench_function("model_loss_and_grad_batch4", |b| {
        b.iter(|| train_model.loss_and_grad(black_box(&refs), black_box(&labels)).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = bench_fft,
        bench_range_doppler_process,
        bench_spectrogram,
        bench_projection,
        bench_model
}
criterion_main!(benches);
