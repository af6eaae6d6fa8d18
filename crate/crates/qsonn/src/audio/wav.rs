//! Minimal RIFF/WAVE reader for the clips this pipeline consumes: mono,
//! 16-bit little-endian PCM at 16 kHz.

use crate::error::{Error, Result};

/// Required sample rate of every input clip.
pub const SAMPLE_RATE_HZ: u32 = 16_000;

/// Samples in a one-second clip after [`super::pad_or_truncate`].
pub const CLIP_SAMPLES: usize = 16_000;

/// A decoded mono clip with samples scaled to `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct PcmClip {
    pub samples: Vec<f32>,
    pub sample_rate_hz: u32,
}

/// Decode a RIFF/WAVE byte stream. Integer sample `s` maps to `s / 32768.0`.
pub fn parse_wav(bytes: &[u8]) -> Result<PcmClip> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::Format("not a RIFF/WAVE stream".into()));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // (format, channels, rate, bits)
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| {
                Error::Format(format!(
                    "chunk {:?} overruns the stream",
                    String::from_utf8_lossy(id)
                ))
            })?;
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(Error::Format("fmt chunk too short".into()));
                }
                fmt = Some((
                    u16::from_le_bytes(body[0..2].try_into().unwrap()),
                    u16::from_le_bytes(body[2..4].try_into().unwrap()),
                    u32::from_le_bytes(body[4..8].try_into().unwrap()),
                    u16::from_le_bytes(body[14..16].try_into().unwrap()),
                ));
            }
            b"data" => data = Some(body),
            _ => {}
        }
        // chunks are word-aligned
        pos = body_end + (size & 1);
    }

    let (format, channels, rate, bits) =
        fmt.ok_or_else(|| Error::Format("missing fmt chunk".into()))?;
    if format != 1 {
        return Err(Error::Format(format!("not PCM (format tag {format})")));
    }
    if bits != 16 {
        return Err(Error::Format(format!(
            "not 16-bit ({bits} bits per sample)"
        )));
    }
    if channels != 1 {
        return Err(Error::Format(format!("not mono ({channels} channels)")));
    }
    if rate != SAMPLE_RATE_HZ {
        return Err(Error::Rate {
            expected: SAMPLE_RATE_HZ,
            actual: rate,
        });
    }

    let data = data.ok_or_else(|| Error::Format("missing data chunk".into()))?;
    let samples = data
        .chunks_exact(2)
        .map(|pair| i16::from_le_bytes([pair[0], pair[1]]) as f32 / 32768.0)
        .collect();
    Ok(PcmClip {
        samples,
        sample_rate_hz: rate,
    })
}

/// Encode a mono 16-bit PCM WAV, the counterpart of [`parse_wav`]; used by
/// fixture generators and synthetic-dataset tooling.
pub fn encode_wav(samples: &[i16], sample_rate: u32) -> Vec<u8> {
    let data_len = (samples.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + samples.len() * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}
