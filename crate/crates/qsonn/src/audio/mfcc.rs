//! MFCC extraction: 30 ms Hamming-windowed frames with a 20 ms hop, a
//! 40-filter mel bank over 0-8000 Hz, log compression, and an orthonormal
//! DCT-II keeping the first 20 coefficients.

use super::fft::fft_power;
use super::wav::{PcmClip, CLIP_SAMPLES, SAMPLE_RATE_HZ};
use crate::error::{Error, Result};
use crate::tensor::Tensor;
use std::f64::consts::PI;

/// Every tunable of the frontend. The defaults are the ones the rest of the
/// pipeline (feature cache, golden fixtures, model geometry) is pinned to;
/// the cache fingerprint derives from these fields, so any change invalidates
/// previously extracted features.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontendConfig {
    pub sample_rate_hz: u32,
    /// 30 ms analysis window.
    pub frame_len: usize,
    /// 20 ms hop: 30 ms windows with 10 ms overlap.
    pub hop: usize,
    pub fft_size: usize,
    pub num_mel_filters: usize,
    pub num_coefficients: usize,
    pub mel_low_hz: f64,
    pub mel_high_hz: f64,
    pub log_floor: f64,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        FrontendConfig {
            sample_rate_hz: SAMPLE_RATE_HZ,
            frame_len: 480,
            hop: 320,
            fft_size: 512,
            num_mel_filters: 40,
            num_coefficients: 20,
            mel_low_hz: 0.0,
            mel_high_hz: 8000.0,
            log_floor: 1e-10,
        }
    }
}

impl FrontendConfig {
    /// Frames produced for a one-second clip: center padding by half a
    /// window on each side gives `16000 / 320 + 1 = 51`.
    pub fn num_frames(&self) -> usize {
        CLIP_SAMPLES / self.hop + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_rate_hz != SAMPLE_RATE_HZ {
            return Err(Error::Config(format!(
                "frontend is pinned to {SAMPLE_RATE_HZ} Hz, got {}",
                self.sample_rate_hz
            )));
        }
        if self.frame_len < 2 || self.hop == 0 {
            return Err(Error::Config(
                "frame length and hop must be positive".into(),
            ));
        }
        if !self.fft_size.is_power_of_two() || self.fft_size < self.frame_len {
            return Err(Error::Config(format!(
                "fft size must be a power of two >= frame length, got {} for frames of {}",
                self.fft_size, self.frame_len
            )));
        }
        if self.num_coefficients == 0 || self.num_coefficients > self.num_mel_filters {
            return Err(Error::Config(format!(
                "need 1 <= coefficients <= mel filters, got {} of {}",
                self.num_coefficients, self.num_mel_filters
            )));
        }
        let nyquist = self.sample_rate_hz as f64 / 2.0;
        if !(0.0..nyquist).contains(&self.mel_low_hz)
            || self.mel_high_hz <= self.mel_low_hz
            || self.mel_high_hz > nyquist
        {
            return Err(Error::Config(format!(
                "mel range [{}, {}] must satisfy 0 <= low < high <= {nyquist}",
                self.mel_low_hz, self.mel_high_hz
            )));
        }
        if !self.log_floor.is_finite() || self.log_floor <= 0.0 {
            return Err(Error::Config("log floor must be positive".into()));
        }
        Ok(())
    }

    /// Stable hash of every field; stored in feature caches so stale
    /// features are refused after a config change.
    pub fn fingerprint(&self) -> u64 {
        let canon = format!(
            "sr={};frame={};hop={};fft={};mels={};coeffs={};lo={};hi={};floor={};window=hamming;mel=htk;dct=ortho2",
            self.sample_rate_hz,
            self.frame_len,
            self.hop,
            self.fft_size,
            self.num_mel_filters,
            self.num_coefficients,
            self.mel_low_hz,
            self.mel_high_hz,
            self.log_floor,
        );
        // FNV-1a
        let mut hash = 0xcbf2_9ce4_8422_2325u64;
        for b in canon.bytes() {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x100_0000_01b3);
        }
        hash
    }
}

/// A feature map together with where it came from.
#[derive(Debug, Clone)]
pub struct MfccFeature {
    /// Shape `[1, 20, 51]`, values in `[-1, 1]`.
    pub values: Tensor<f32>,
    pub source_path: String,
    /// Class id in `0..=9`.
    pub label: u32,
}

fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10.0f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular, area-normalized mel filterbank as a `num_filters x num_bins`
/// row-major weight matrix.
fn mel_filterbank(cfg: &FrontendConfig) -> Vec<f64> {
    let num_bins = cfg.fft_size / 2 + 1;
    let m = cfg.num_mel_filters;
    let mel_lo = hz_to_mel(cfg.mel_low_hz);
    let mel_hi = hz_to_mel(cfg.mel_high_hz);
    let edges: Vec<f64> = (0..m + 2)
        .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (m + 1) as f64))
        .collect();

    let bin_hz = cfg.sample_rate_hz as f64 / cfg.fft_size as f64;
    let mut weights = vec![0.0f64; m * num_bins];
    for f in 0..m {
        let (left, center, right) = (edges[f], edges[f + 1], edges[f + 2]);
        // area normalization: each triangle integrates to the same mass
        let norm = 2.0 / (right - left);
        for k in 0..num_bins {
            let freq = k as f64 * bin_hz;
            let w = if freq <= left || freq >= right {
                0.0
            } else if freq <= center {
                (freq - left) / (center - left)
            } else {
                (right - freq) / (right - center)
            };
            weights[f * num_bins + k] = w * norm;
        }
    }
    weights
}

/// Symmetric Hamming window of length `n`.
fn hamming(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Reflect-pad by half a window on each side so frames are centered.
fn center_pad(samples: &[f32], half: usize) -> Vec<f64> {
    let n = samples.len();
    let mut out = Vec::with_capacity(n + 2 * half);
    for i in 0..half {
        out.push(samples[half - i] as f64);
    }
    out.extend(samples.iter().map(|&s| s as f64));
    for i in 0..half {
        out.push(samples[n - 2 - i] as f64);
    }
    out
}

/// Extract the `20 x 51` MFCC matrix of a one-second clip.
///
/// Pipeline: center-pad, frame, Hamming window, 512-point power spectrum,
/// mel filterbank, floored natural log, orthonormal DCT-II, keep
/// coefficients `0..20`, transpose to coefficients-by-frames.
pub fn compute_mfcc(clip: &PcmClip, cfg: &FrontendConfig) -> Result<Tensor<f32>> {
    cfg.validate()?;
    if clip.samples.len() != CLIP_SAMPLES {
        return Err(Error::Shape(format!(
            "expected a {CLIP_SAMPLES}-sample clip, got {}",
            clip.samples.len()
        )));
    }
    let frames = cfg.num_frames();
    let window = hamming(cfg.frame_len);
    let bank = mel_filterbank(cfg);
    let num_bins = cfg.fft_size / 2 + 1;
    let padded = center_pad(&clip.samples, cfg.frame_len / 2);

    let mut coeffs = vec![0.0f64; frames * cfg.num_coefficients];
    let mut frame_buf = vec![0.0f64; cfg.frame_len];
    let m = cfg.num_mel_filters;
    for t in 0..frames {
        let start = t * cfg.hop;
        for (i, w) in window.iter().enumerate() {
            frame_buf[i] = padded[start + i] * w;
        }
        let power = fft_power(&frame_buf, cfg.fft_size);
        debug_assert_eq!(power.len(), num_bins);

        let mut log_mel = vec![0.0f64; m];
        for f in 0..m {
            let row = &bank[f * num_bins..(f + 1) * num_bins];
            let energy: f64 = row.iter().zip(&power).map(|(w, p)| w * p).sum();
            log_mel[f] = energy.max(cfg.log_floor).ln();
        }

        // orthonormal DCT-II
        for k in 0..cfg.num_coefficients {
            let scale = if k == 0 {
                (1.0 / m as f64).sqrt()
            } else {
                (2.0 / m as f64).sqrt()
            };
            let mut acc = 0.0;
            for (j, &v) in log_mel.iter().enumerate() {
                acc += v * (PI * k as f64 * (2 * j + 1) as f64 / (2 * m) as f64).cos();
            }
            coeffs[t * cfg.num_coefficients + k] = scale * acc;
        }
    }

    // transpose frames-by-coeffs to coeffs-by-frames
    let mut out = vec![0.0f32; cfg.num_coefficients * frames];
    for t in 0..frames {
        for k in 0..cfg.num_coefficients {
            out[k * frames + t] = coeffs[t * cfg.num_coefficients + k] as f32;
        }
    }
    Ok(Tensor::from_vec(&[cfg.num_coefficients, frames], out))
}

/// Per-utterance min-max normalization onto `[-1, 1]`; a constant input maps
/// to all zeros.
pub fn normalize_minmax(m: &Tensor<f32>) -> Tensor<f32> {
    let (mut lo, mut hi) = (f32::INFINITY, f32::NEG_INFINITY);
    for &v in m.data() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi <= lo {
        return m.zeros_like();
    }
    let span = hi - lo;
    m.map(|v| 2.0 * (v - lo) / span - 1.0)
}
