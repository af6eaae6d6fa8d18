//! Audio frontend: WAV decoding and MFCC feature extraction.
//!
//! The full path from a raw clip to a network input is
//! [`parse_wav`] -> [`pad_or_truncate`] -> [`compute_mfcc`] ->
//! [`normalize_minmax`], packaged as [`extract_feature`].

mod fft;
mod mfcc;
mod wav;

pub use fft::fft_power;
pub use mfcc::{compute_mfcc, normalize_minmax, FrontendConfig, MfccFeature};
pub use wav::{encode_wav, parse_wav, PcmClip, CLIP_SAMPLES, SAMPLE_RATE_HZ};

use crate::error::Result;
use crate::tensor::Tensor;

/// Force a clip to exactly one second: short clips are zero-padded at the
/// end, long clips truncated at the end.
pub fn pad_or_truncate(mut clip: PcmClip) -> PcmClip {
    clip.samples.resize(CLIP_SAMPLES, 0.0);
    clip
}

/// Run the whole frontend on raw WAV bytes: a `[1, 20, 51]` feature map with
/// values in `[-1, 1]`.
pub fn extract_feature(bytes: &[u8], config: &FrontendConfig) -> Result<Tensor<f32>> {
    let clip = pad_or_truncate(parse_wav(bytes)?);
    let mfcc = compute_mfcc(&clip, config)?;
    let normalized = normalize_minmax(&mfcc);
    normalized.reshape(&[1, config.num_coefficients, mfcc.shape()[1]])
}
