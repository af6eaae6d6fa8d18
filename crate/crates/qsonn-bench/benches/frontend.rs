//! MFCC extraction latency for a one-second clip.

use criterion::{criterion_group, criterion_main, Criterion};
use qsonn::audio::{compute_mfcc, normalize_minmax, FrontendConfig, PcmClip};
use qsonn_bench::clip;
use std::hint::black_box;

fn mfcc_extraction(c: &mut Criterion) {
    let cfg = FrontendConfig::default();
    let pcm = PcmClip {
        samples: clip(11),
        sample_rate_hz: 16000,
    };
    c.bench_function("mfcc_one_second_clip", |b| {
        b.iter(|| {
            let mfcc = compute_mfcc(black_box(&pcm), &cfg).unwrap();
            black_box(normalize_minmax(&mfcc))
        })
    });
}

criterion_group!(benches, mfcc_extraction);
criterion_main!(benches);
