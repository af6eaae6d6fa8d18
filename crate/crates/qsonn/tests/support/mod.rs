//! Shared helpers for the integration suites: independent naive-loop oracles
//! for every layer equation, a reference MFCC implementation, and synthetic
//! WAV fixtures.
//!
//! Everything here deliberately avoids the library's optimized paths
//! (patch matrices, radix-2 FFT): oracles must stay independent of the
//! implementations they check.

#![allow(dead_code)]

use qsonn::audio::PcmClip;
use qsonn::tensor::{Element, KernelSpec, Tensor};
use std::f64::consts::PI;

/// Sampled value of the padded input, zero outside bounds.
fn tap<E: Element>(x: &Tensor<E>, c: usize, si: isize, sj: isize, h: usize, w: usize) -> f64 {
    if si < 0 || sj < 0 || si >= h as isize || sj >= w as isize {
        0.0
    } else {
        x.get(&[c, si as usize, sj as usize]).to_f64()
    }
}

/// Direct nested-loop convolution: `y(co,i,j) = sum w * x + b`.
pub fn naive_conv_forward<E: Element>(
    x: &Tensor<E>,
    weights: &Tensor<E>, // [C_out, C_in, kh, kw]
    bias: &Tensor<E>,
    spec: &KernelSpec,
) -> Tensor<f64> {
    let (c_in, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let c_out = weights.shape()[0];
    let (out_h, out_w) = spec.output_size(h, w).unwrap();
    let mut out = Tensor::<f64>::zeros(&[c_out, out_h, out_w]);
    for co in 0..c_out {
        for oi in 0..out_h {
            for oj in 0..out_w {
                let mut acc = bias.get(&[co]).to_f64();
                for c in 0..c_in {
                    for ki in 0..spec.kernel_h {
                        for kj in 0..spec.kernel_w {
                            let si = (oi * spec.stride + ki * spec.dilation) as isize
                                - spec.pad as isize;
                            let sj = (oj * spec.stride + kj * spec.dilation) as isize
                                - spec.pad as isize;
                            acc += weights.get(&[co, c, ki, kj]).to_f64() * tap(x, c, si, sj, h, w);
                        }
                    }
                }
                out.set(&[co, oi, oj], acc);
            }
        }
    }
    out
}

/// Direct power-series layer: `y = sum_q w_q . x^q + b`, looping positions,
/// powers and taps.
pub fn naive_selfonn_forward<E: Element>(
    x: &Tensor<E>,
    linear: &Tensor<E>, // [Q, C_out, C_in, kh, kw]
    bias: &Tensor<E>,
    spec: &KernelSpec,
) -> Tensor<f64> {
    let (c_in, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let q_max = linear.shape()[0];
    let c_out = linear.shape()[1];
    let (out_h, out_w) = spec.output_size(h, w).unwrap();
    let mut out = Tensor::<f64>::zeros(&[c_out, out_h, out_w]);
    for co in 0..c_out {
        for oi in 0..out_h {
            for oj in 0..out_w {
                let mut acc = bias.get(&[co]).to_f64();
                for q in 0..q_max {
                    for c in 0..c_in {
                        for ki in 0..spec.kernel_h {
                            for kj in 0..spec.kernel_w {
                                let si = (oi * spec.stride + ki * spec.dilation) as isize
                                    - spec.pad as isize;
                                let sj = (oj * spec.stride + kj * spec.dilation) as isize
                                    - spec.pad as isize;
                                let xv = tap(x, c, si, sj, h, w).powi(q as i32 + 1);
                                acc += linear.get(&[q, co, c, ki, kj]).to_f64() * xv;
                            }
                        }
                    }
                }
                out.set(&[co, oi, oj], acc);
            }
        }
    }
    out
}

/// Direct quadratic operational layer:
/// `y = sum_q (x^q)^T Omega_q x^q + sum_q w_q . x^q + b`, with the patch
/// vector vectorized kernel-row-major within each channel.
pub fn naive_qselfonn_forward<E: Element>(
    x: &Tensor<E>,
    linear: &Tensor<E>, // [Q, C_out, C_in, kh, kw]
    blocks: &Tensor<E>, // [Q, C_out, C_in, n, n]
    bias: &Tensor<E>,
    spec: &KernelSpec,
) -> Tensor<f64> {
    let (c_in, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let q_max = linear.shape()[0];
    let c_out = linear.shape()[1];
    let n = spec.receptive_field();
    let (out_h, out_w) = spec.output_size(h, w).unwrap();
    let mut out = naive_selfonn_forward(x, linear, bias, spec);
    for co in 0..c_out {
        for oi in 0..out_h {
            for oj in 0..out_w {
                let mut acc = out.get(&[co, oi, oj]);
                for q in 0..q_max {
                    for c in 0..c_in {
                        // materialize this channel's patch vector, powered
                        let mut patch = vec![0.0f64; n];
                        for ki in 0..spec.kernel_h {
                            for kj in 0..spec.kernel_w {
                                let si = (oi * spec.stride + ki * spec.dilation) as isize
                                    - spec.pad as isize;
                                let sj = (oj * spec.stride + kj * spec.dilation) as isize
                                    - spec.pad as isize;
                                patch[ki * spec.kernel_w + kj] =
                                    tap(x, c, si, sj, h, w).powi(q as i32 + 1);
                            }
                        }
                        for i in 0..n {
                            for j in 0..n {
                                acc += patch[i] * blocks.get(&[q, co, c, i, j]).to_f64() * patch[j];
                            }
                        }
                    }
                }
                out.set(&[co, oi, oj], acc);
            }
        }
    }
    out
}

/// Max absolute difference between a result and an f64 oracle.
pub fn max_diff_vs_oracle<E: Element>(got: &Tensor<E>, oracle: &Tensor<f64>) -> f64 {
    assert_eq!(got.shape(), oracle.shape());
    got.data()
        .iter()
        .zip(oracle.data())
        .map(|(&a, &b)| (a.to_f64() - b).abs())
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Reference MFCC: same pinned conventions as the frontend, independent code
// path (naive DFT, per-frame loops).
// ---------------------------------------------------------------------------

fn ref_hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn ref_mel_to_hz(mel: f64) -> f64 {
    700.0 * (10.0f64.powf(mel / 2595.0) - 1.0)
}

/// Reference MFCC of a 16000-sample clip: 20 coefficients x 51 frames.
pub fn reference_mfcc(samples: &[f32]) -> Vec<f64> {
    assert_eq!(samples.len(), 16000);
    const FRAME: usize = 480;
    const HOP: usize = 320;
    const NFFT: usize = 512;
    const NMELS: usize = 40;
    const NCOEFF: usize = 20;
    const FRAMES: usize = 51;

    // reflect padding by half a frame on each side
    let half = FRAME / 2;
    let mut padded = Vec::with_capacity(16000 + FRAME);
    for i in 0..half {
        padded.push(samples[half - i] as f64);
    }
    padded.extend(samples.iter().map(|&s| s as f64));
    for i in 0..half {
        padded.push(samples[16000 - 2 - i] as f64);
    }

    let window: Vec<f64> = (0..FRAME)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / (FRAME - 1) as f64).cos())
        .collect();

    // triangular area-normalized mel filters over the 257 DFT bins
    let mel_hi = ref_hz_to_mel(8000.0);
    let edges: Vec<f64> = (0..NMELS + 2)
        .map(|i| ref_mel_to_hz(mel_hi * i as f64 / (NMELS + 1) as f64))
        .collect();
    let bin_hz = 16000.0 / NFFT as f64;

    let mut out = vec![0.0f64; NCOEFF * FRAMES];
    for t in 0..FRAMES {
        let frame: Vec<f64> = (0..FRAME)
            .map(|i| padded[t * HOP + i] * window[i])
            .collect();

        // naive DFT power spectrum
        let mut power = vec![0.0f64; NFFT / 2 + 1];
        for (k, p) in power.iter_mut().enumerate() {
            let mut re = 0.0;
            let mut im = 0.0;
            for (i, &v) in frame.iter().enumerate() {
                let ang = -2.0 * PI * (k * i) as f64 / NFFT as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            *p = re * re + im * im;
        }

        let mut log_mel = vec![0.0f64; NMELS];
        for (f, lm) in log_mel.iter_mut().enumerate() {
            let (left, center, right) = (edges[f], edges[f + 1], edges[f + 2]);
            let norm = 2.0 / (right - left);
            let mut energy = 0.0;
            for (k, &p) in power.iter().enumerate() {
                let freq = k as f64 * bin_hz;
                let weight = if freq <= left || freq >= right {
                    0.0
                } else if freq <= center {
                    (freq - left) / (center - left)
                } else {
                    (right - freq) / (right - center)
                };
                energy += weight * norm * p;
            }
            *lm = energy.max(1e-10).ln();
        }

        for k in 0..NCOEFF {
            let scale = if k == 0 {
                (1.0 / NMELS as f64).sqrt()
            } else {
                (2.0 / NMELS as f64).sqrt()
            };
            let mut acc = 0.0;
            for (j, &v) in log_mel.iter().enumerate() {
                acc += v * (PI * k as f64 * (2 * j + 1) as f64 / (2 * NMELS) as f64).cos();
            }
            // coefficient-major layout, matching the frontend's 20x51
            out[k * FRAMES + t] = scale * acc;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Synthetic audio fixtures
// ---------------------------------------------------------------------------

/// The 1 kHz, amplitude-0.5 sine used by the golden-vector test.
pub fn golden_sine_clip() -> PcmClip {
    let samples: Vec<f32> = (0..16000)
        .map(|t| (0.5 * (2.0 * PI * 1000.0 * t as f64 / 16000.0).sin()) as f32)
        .collect();
    PcmClip {
        samples,
        sample_rate_hz: 16000,
    }
}

/// Mono 16-bit PCM WAV bytes for a tone burst with harmonics and noise;
/// deterministic in its arguments.
pub fn tone_wav(freq_hz: f64, seed: u64, len: usize) -> Vec<u8> {
    let mut rng = qsonn::rng::SplitMix64::new(seed);
    let amp = rng.uniform(0.35, 0.6);
    let phase = rng.uniform(0.0, 2.0 * PI);
    let samples: Vec<i16> = (0..len)
        .map(|t| {
            let ts = t as f64 / 16000.0;
            let tone = amp * (2.0 * PI * freq_hz * ts + phase).sin()
                + 0.2 * amp * (2.0 * PI * 2.0 * freq_hz * ts + phase).sin();
            let noise = rng.uniform(-0.02, 0.02);
            ((tone + noise).clamp(-0.99, 0.99) * 32767.0) as i16
        })
        .collect();
    encode_wav(&samples, 16000)
}

/// Minimal RIFF/WAVE encoder for fixtures.
pub fn encode_wav(samples: &[i16], sample_rate: u32) -> Vec<u8> {
    let data_len = (samples.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + samples.len() * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

/// Two-class tone fixture: `count` clips alternating between a low and a
/// high tone, as in-memory WAV byte buffers with labels.
pub fn two_class_clips(count: usize, seed: u64) -> Vec<(Vec<u8>, u32)> {
    (0..count)
        .map(|i| {
            let label = (i % 2) as u32;
            let freq = if label == 0 { 400.0 } else { 1800.0 };
            (
                tone_wav(
                    freq,
                    seed.wrapping_add(i as u64 * 7919),
                    15000 + (i % 5) * 500,
                ),
                label,
            )
        })
        .collect()
}
