//! Per-utterance forward-pass latency of the three layer families, the
//! measured counterpart of the analytic MAC model.

use criterion::{criterion_group, criterion_main, Criterion};
use qsonn::model::LayerKind;
use qsonn_bench::{speech_model, utterance};
use std::hint::black_box;

fn forward_passes(c: &mut Criterion) {
    let x = utterance(7);
    let mut group = c.benchmark_group("forward_per_utterance");
    group.sample_size(20);
    for (name, kind, q) in [
        ("conv", LayerKind::Conv, 1),
        ("selfonn_q2", LayerKind::SelfOnn, 2),
        ("selfonn_q4", LayerKind::SelfOnn, 4),
        ("qselfonn_q2", LayerKind::QSelfOnn, 2),
        ("qselfonn_q4", LayerKind::QSelfOnn, 4),
    ] {
        let model = speech_model(kind, q);
        group.bench_function(name, |b| {
            b.iter(|| black_box(model.infer(black_box(&x)).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, forward_passes);
criterion_main!(benches);
