//! Shared builders for the criterion benches: deterministic models and
//! inputs at the speech-command geometry.

use qsonn::model::{build_model, LayerKind, Model, ModelSpec};
use qsonn::rng::SplitMix64;
use qsonn::tensor::Tensor;

/// An initialized model of the given kind at the default speech geometry.
pub fn speech_model(kind: LayerKind, q_max: usize) -> Model {
    let spec = ModelSpec::speech_default(kind, q_max);
    let mut model = build_model(&spec).expect("valid default spec");
    model.init_params(42);
    model
}

/// A deterministic fake utterance feature map in `[-1, 1]`.
pub fn utterance(seed: u64) -> Tensor<f32> {
    let mut rng = SplitMix64::new(seed);
    Tensor::from_vec(
        &[1, 20, 51],
        (0..20 * 51)
            .map(|_| rng.uniform(-1.0, 1.0) as f32)
            .collect(),
    )
}

/// A deterministic one-second multi-tone clip.
pub fn clip(seed: u64) -> Vec<f32> {
    let mut rng = SplitMix64::new(seed);
    let f1 = rng.uniform(200.0, 600.0);
    let f2 = rng.uniform(800.0, 3000.0);
    (0..16000)
        .map(|t| {
            let ts = t as f64 / 16000.0;
            (0.4 * (2.0 * std::f64::consts::PI * f1 * ts).sin()
                + 0.2 * (2.0 * std::f64::consts::PI * f2 * ts).sin()) as f32
        })
        .collect()
}
