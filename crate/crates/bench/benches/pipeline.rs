use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rialscan_bench::{binary_note, gray_note, model, note};
use rialscan_core::synth::feature_clusters;
use rialscan_core::{
    adaptive_threshold, close, label_components, median3x3, recognize, train_mlp, wiener_denoise, Connectivity,
    PipelineConfig, StructuringElement, ThresholdConfig, TrainConfig,
};

fn stages(c: &mut Criterion) {
    let gray = gray_note();
    let binary = binary_note();
    c.bench_function("wiener 5x5", |b| b.iter(|| wiener_denoise(black_box(&gray), 5).unwrap()));
    for window in [15, 31, 61] {
        let cfg = ThresholdConfig { window, bias: 0.1 };
        c.bench_function(&format!("threshold window {window}"), |b| {
            b.iter(|| adaptive_threshold(black_box(&gray), &cfg).unwrap())
        });
    }
    c.bench_function("median 3x3", |b| b.iter(|| median3x3(black_box(&binary))));
    c.bench_function("label 8-connected", |b| b.iter(|| label_components(black_box(&binary), Connectivity::Eight)));
    let se = StructuringElement::rect(9, 5).unwrap();
    c.bench_function("close 9x5", |b| b.iter(|| close(black_box(&binary), &se)));
}

fn end_to_end(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let model = model();
    for value in [1000, 100000] {
        let img = note(value, 11);
        c.bench_function(&format!("recognize {value}"), |b| b.iter(|| recognize(black_box(&img), &cfg, &model)));
    }
}

fn training(c: &mut Criterion) {
    let samples = feature_clusters(300, 7);
    let cfg = TrainConfig { epochs: 100, ..TrainConfig::default() };
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    group.bench_function("300 samples, 100 epochs", |b| b.iter(|| train_mlp(black_box(&samples), &cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, stages, end_to_end, training);
criterion_main!(benches);
