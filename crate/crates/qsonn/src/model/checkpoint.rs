//! Versioned binary checkpoint container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic            8 bytes  "QSONNCKP"
//! format_version   u32      currently 1
//! model spec       layer_kind u8, quad_mode u8, q_max u32, channels 2xu32,
//!                  fc_out u32, kernel (kh, kw, stride, dilation, pad) 5xu32,
//!                  pool_size u32, dropout_rate f64, input_shape 3xu32
//! train state      epoch u32, best_val_acc f64, rng_step u64,
//!                  patience_streak u32, has_velocity u8
//! tensor count     u32
//! tensor entry     name_len u32, name utf-8, dtype u8 (1 = f32),
//!                  ndim u32, dims u64 each, payload f32 little-endian
//! ```
//!
//! Parameter tensors use their canonical names; optimizer velocity tensors
//! (present only in mid-training checkpoints) use `velocity.<name>`. A load
//! followed by a save reproduces every payload bit-exactly.

use super::{build_model, LayerKind, Model, ModelSpec};
use crate::error::{Error, Result};
use crate::layers::QuadMode;
use crate::tensor::{KernelSpec, Tensor};
use std::fs;
use std::path::Path;

const MAGIC: &[u8; 8] = b"QSONNCKP";
const FORMAT_VERSION: u32 = 1;
const DTYPE_F32: u8 = 1;

/// Training progress stored alongside the parameters so a resumed run
/// reproduces the uninterrupted one step for step.
#[derive(Debug, Clone, Default)]
pub struct TrainState {
    pub epoch: u32,
    pub best_val_acc: f64,
    /// Dropout step counter (one per training forward pass).
    pub rng_step: u64,
    /// Consecutive epochs without matching the best validation accuracy.
    pub patience_streak: u32,
    /// Optimizer velocity, aligned with `Model::named_params` order.
    pub velocity: Option<Vec<Tensor<f32>>>,
}

fn kind_tag(kind: LayerKind) -> u8 {
    match kind {
        LayerKind::Conv => 0,
        LayerKind::SelfOnn => 1,
        LayerKind::QSelfOnn => 2,
    }
}

fn kind_from_tag(tag: u8) -> Result<LayerKind> {
    match tag {
        0 => Ok(LayerKind::Conv),
        1 => Ok(LayerKind::SelfOnn),
        2 => Ok(LayerKind::QSelfOnn),
        other => Err(Error::Format(format!("unknown layer kind tag {other}"))),
    }
}

fn mode_tag(mode: QuadMode) -> u8 {
    match mode {
        QuadMode::Off => 0,
        QuadMode::UpperTriangular => 1,
        QuadMode::FullBlock => 2,
    }
}

fn mode_from_tag(tag: u8) -> Result<QuadMode> {
    match tag {
        0 => Ok(QuadMode::Off),
        1 => Ok(QuadMode::UpperTriangular),
        2 => Ok(QuadMode::FullBlock),
        other => Err(Error::Format(format!("unknown quad mode tag {other}"))),
    }
}

fn encode(model: &Model, state: &TrainState) -> Vec<u8> {
    let spec = model.spec();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());

    out.push(kind_tag(spec.layer_kind));
    out.push(mode_tag(spec.quad_mode));
    out.extend_from_slice(&(spec.q_max as u32).to_le_bytes());
    out.extend_from_slice(&(spec.channels[0] as u32).to_le_bytes());
    out.extend_from_slice(&(spec.channels[1] as u32).to_le_bytes());
    out.extend_from_slice(&(spec.fc_out as u32).to_le_bytes());
    for v in [
        spec.kernel.kernel_h,
        spec.kernel.kernel_w,
        spec.kernel.stride,
        spec.kernel.dilation,
        spec.kernel.pad,
        spec.pool_size,
    ] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    out.extend_from_slice(&spec.dropout_rate.to_le_bytes());
    for v in spec.input_shape {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }

    out.extend_from_slice(&state.epoch.to_le_bytes());
    out.extend_from_slice(&state.best_val_acc.to_le_bytes());
    out.extend_from_slice(&state.rng_step.to_le_bytes());
    out.extend_from_slice(&state.patience_streak.to_le_bytes());
    out.push(state.velocity.is_some() as u8);

    let params = model.named_params();
    let velocity_entries: Vec<(String, &Tensor<f32>)> = match &state.velocity {
        Some(vel) => {
            assert_eq!(
                vel.len(),
                params.len(),
                "velocity must align with parameters"
            );
            params
                .iter()
                .zip(vel)
                .map(|((name, _), v)| (format!("velocity.{name}"), v))
                .collect()
        }
        None => Vec::new(),
    };
    let total = params.len() + velocity_entries.len();
    out.extend_from_slice(&(total as u32).to_le_bytes());
    for (name, tensor) in params.into_iter().chain(velocity_entries) {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.push(DTYPE_F32);
        out.extend_from_slice(&(tensor.shape().len() as u32).to_le_bytes());
        for &d in tensor.shape() {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for &v in tensor.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format(format!(
                "checkpoint truncated: wanted {n} bytes at offset {}, file has {}",
                self.pos,
                self.bytes.len()
            )));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn decode(bytes: &[u8]) -> Result<(Model, TrainState)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Format("not a checkpoint file (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported checkpoint format version {version} (expected {FORMAT_VERSION})"
        )));
    }

    let layer_kind = kind_from_tag(r.u8()?)?;
    let quad_mode = mode_from_tag(r.u8()?)?;
    let q_max = r.u32()? as usize;
    let channels = [r.u32()? as usize, r.u32()? as usize];
    let fc_out = r.u32()? as usize;
    let kernel = KernelSpec::new(
        r.u32()? as usize,
        r.u32()? as usize,
        r.u32()? as usize,
        r.u32()? as usize,
        r.u32()? as usize,
    )?;
    let pool_size = r.u32()? as usize;
    let dropout_rate = r.f64()?;
    let input_shape = [r.u32()? as usize, r.u32()? as usize, r.u32()? as usize];
    let spec = ModelSpec {
        layer_kind,
        q_max,
        quad_mode,
        channels,
        fc_out,
        kernel,
        pool_size,
        dropout_rate,
        input_shape,
    };

    let mut state = TrainState {
        epoch: r.u32()?,
        best_val_acc: r.f64()?,
        rng_step: r.u64()?,
        patience_streak: r.u32()?,
        velocity: None,
    };
    let has_velocity = r.u8()? != 0;

    let count = r.u32()? as usize;
    let mut entries: Vec<(String, Tensor<f32>)> = Vec::with_capacity(count);
    for _ in 0..count {
        let name_len = r.u32()? as usize;
        let name = String::from_utf8(r.take(name_len)?.to_vec())
            .map_err(|_| Error::Format("tensor name is not valid utf-8".into()))?;
        let dtype = r.u8()?;
        if dtype != DTYPE_F32 {
            return Err(Error::Format(format!(
                "unsupported dtype tag {dtype} for '{name}'"
            )));
        }
        let ndim = r.u32()? as usize;
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(r.u64()? as usize);
        }
        let numel: usize = shape.iter().product();
        let payload = r.take(numel * 4)?;
        let data: Vec<f32> = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let tensor = Tensor::new(&shape, data)
            .map_err(|e| Error::Format(format!("corrupt payload for '{name}': {e}")))?;
        entries.push((name, tensor));
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after checkpoint",
            bytes.len() - r.pos
        )));
    }

    let mut model = build_model(&spec)?;
    let expected: Vec<String> = model
        .named_params()
        .iter()
        .map(|(n, _)| n.clone())
        .collect();
    let mut velocity = if has_velocity {
        Some(Vec::with_capacity(expected.len()))
    } else {
        None
    };
    {
        let mut params = model.params_mut();
        for (idx, name) in expected.iter().enumerate() {
            let (_, tensor) = entries
                .iter()
                .find(|(n, _)| n == name)
                .ok_or_else(|| Error::Format(format!("checkpoint is missing tensor '{name}'")))?;
            if tensor.shape() != params[idx].shape() {
                return Err(Error::Shape(format!(
                    "tensor '{name}' has shape {:?} but the spec implies {:?}",
                    tensor.shape(),
                    params[idx].shape()
                )));
            }
            params[idx].data_mut().copy_from_slice(tensor.data());
            if let Some(vel) = &mut velocity {
                let vname = format!("velocity.{name}");
                let (_, vt) = entries.iter().find(|(n, _)| n == &vname).ok_or_else(|| {
                    Error::Format(format!("checkpoint is missing tensor '{vname}'"))
                })?;
                if vt.shape() != tensor.shape() {
                    return Err(Error::Shape(format!(
                        "velocity '{vname}' has shape {:?} but the parameter is {:?}",
                        vt.shape(),
                        tensor.shape()
                    )));
                }
                vel.push(vt.clone());
            }
        }
    }
    state.velocity = velocity;
    for layer in [model.layer1(), model.layer2()] {
        if let super::OpLayer::Onn(p) = layer {
            p.validate(&model.spec().kernel).map_err(|e| {
                Error::Format(format!("checkpoint violates the layer's mode invariants: {e}"))
            })?;
        }
    }
    Ok((model, state))
}

/// Save a model with no training state.
pub fn save_checkpoint(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    save_checkpoint_with_state(model, &TrainState::default(), path)
}

/// Save a model plus training progress (mid-training checkpoints).
pub fn save_checkpoint_with_state(
    model: &Model,
    state: &TrainState,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(model, state)).map_err(|e| Error::io(path, e))
}

/// Load a checkpoint, rebuilding the model from its embedded spec.
pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(Model, TrainState)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

/// Load a checkpoint and insist its embedded spec matches `expected`.
pub fn load_checkpoint_expecting(
    path: impl AsRef<Path>,
    expected: &ModelSpec,
) -> Result<(Model, TrainState)> {
    let (model, state) = load_checkpoint(path)?;
    if model.spec() != expected {
        return Err(Error::Format(format!(
            "checkpoint spec mismatch: file holds a {} model with Q={} ({:?}), but a {} model with Q={} ({:?}) was requested",
            model.spec().layer_kind.as_str(),
            model.spec().q_max,
            model.spec().quad_mode,
            expected.layer_kind.as_str(),
            expected.q_max,
            expected.quad_mode,
        )));
    }
    Ok((model, state))
}
