//! Sliding-window geometry: patch extraction and its adjoint scatter.

use crate::error::{Error, Result};
use crate::tensor::{Element, Tensor};

/// Geometry of a sliding kernel window. Padding applies to all four sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelSpec {
    pub kernel_h: usize,
    pub kernel_w: usize,
    pub stride: usize,
    pub dilation: usize,
    pub pad: usize,
}

impl KernelSpec {
    pub fn new(
        kernel_h: usize,
        kernel_w: usize,
        stride: usize,
        dilation: usize,
        pad: usize,
    ) -> Result<Self> {
        if kernel_h < 1 || kernel_w < 1 || stride < 1 || dilation < 1 {
            return Err(Error::Config(format!(
                "kernel extents, stride and dilation must be >= 1 (got {kernel_h}x{kernel_w}, stride {stride}, dilation {dilation})"
            )));
        }
        Ok(KernelSpec {
            kernel_h,
            kernel_w,
            stride,
            dilation,
            pad,
        })
    }

    /// The 3x3 / stride 1 / dilation 1 / pad 2 window used by the default model.
    pub fn default_3x3_pad2() -> Self {
        KernelSpec {
            kernel_h: 3,
            kernel_w: 3,
            stride: 1,
            dilation: 1,
            pad: 2,
        }
    }

    /// Receptive-field size `n = kernel_h * kernel_w`.
    pub fn receptive_field(&self) -> usize {
        self.kernel_h * self.kernel_w
    }

    fn dilated(&self) -> (usize, usize) {
        (
            self.dilation * (self.kernel_h - 1) + 1,
            self.dilation * (self.kernel_w - 1) + 1,
        )
    }

    /// Output extents for an `h x w` input, or an error if the dilated kernel
    /// exceeds the padded input.
    pub fn output_size(&self, h: usize, w: usize) -> Result<(usize, usize)> {
        let (dk_h, dk_w) = self.dilated();
        let (ph, pw) = (h + 2 * self.pad, w + 2 * self.pad);
        if dk_h > ph || dk_w > pw {
            return Err(Error::Shape(format!(
                "dilated kernel {dk_h}x{dk_w} exceeds padded input {ph}x{pw}"
            )));
        }
        Ok(((ph - dk_h) / self.stride + 1, (pw - dk_w) / self.stride + 1))
    }
}

/// Materialize every receptive field of a `[C, H, W]` input as a row of a
/// `[P, C*kh*kw]` matrix, `P = out_h * out_w`. Rows are vectorized
/// channel-major, then kernel-row, then kernel-column; out-of-bounds taps
/// read as zero.
pub fn extract_patches<E: Element>(x: &Tensor<E>, spec: &KernelSpec) -> Result<Tensor<E>> {
    let [c_in, h, w] = dims3(x)?;
    let (out_h, out_w) = spec.output_size(h, w)?;
    let n = spec.receptive_field();
    let row_len = c_in * n;
    let positions = out_h * out_w;

    let src = x.data();
    let mut data = vec![E::ZERO; positions * row_len];
    for oi in 0..out_h {
        for oj in 0..out_w {
            let row = (oi * out_w + oj) * row_len;
            let base_i = (oi * spec.stride) as isize - spec.pad as isize;
            let base_j = (oj * spec.stride) as isize - spec.pad as isize;
            for c in 0..c_in {
                let chan = c * h * w;
                let dst = row + c * n;
                for ki in 0..spec.kernel_h {
                    let si = base_i + (ki * spec.dilation) as isize;
                    if si < 0 || si >= h as isize {
                        continue;
                    }
                    for kj in 0..spec.kernel_w {
                        let sj = base_j + (kj * spec.dilation) as isize;
                        if sj < 0 || sj >= w as isize {
                            continue;
                        }
                        data[dst + ki * spec.kernel_w + kj] =
                            src[chan + si as usize * w + sj as usize];
                    }
                }
            }
        }
    }
    Ok(Tensor::from_vec(&[positions, row_len], data))
}

/// Adjoint of [`extract_patches`]: scatter-add per-patch gradients back onto
/// the input grid, dropping contributions that fell in the padding.
pub fn scatter_patches<E: Element>(
    patch_grads: &Tensor<E>,
    input_shape: &[usize],
    spec: &KernelSpec,
) -> Result<Tensor<E>> {
    let [c_in, h, w]: [usize; 3] = input_shape
        .try_into()
        .map_err(|_| Error::Shape(format!("expected 3-D input shape, got {input_shape:?}")))?;
    let (out_h, out_w) = spec.output_size(h, w)?;
    let n = spec.receptive_field();
    let row_len = c_in * n;
    if patch_grads.shape() != [out_h * out_w, row_len] {
        return Err(Error::Shape(format!(
            "patch gradient shape {:?} does not match geometry [{}, {}]",
            patch_grads.shape(),
            out_h * out_w,
            row_len
        )));
    }

    let src = patch_grads.data();
    let mut out = Tensor::zeros(input_shape);
    let dst = out.data_mut();
    for oi in 0..out_h {
        for oj in 0..out_w {
            let row = (oi * out_w + oj) * row_len;
            let base_i = (oi * spec.stride) as isize - spec.pad as isize;
            let base_j = (oj * spec.stride) as isize - spec.pad as isize;
            for c in 0..c_in {
                let chan = c * h * w;
                let srow = row + c * n;
                for ki in 0..spec.kernel_h {
                    let si = base_i + (ki * spec.dilation) as isize;
                    if si < 0 || si >= h as isize {
                        continue;
                    }
                    for kj in 0..spec.kernel_w {
                        let sj = base_j + (kj * spec.dilation) as isize;
                        if sj < 0 || sj >= w as isize {
                            continue;
                        }
                        dst[chan + si as usize * w + sj as usize] +=
                            src[srow + ki * spec.kernel_w + kj];
                    }
                }
            }
        }
    }
    Ok(out)
}

pub(crate) fn dims3<E: Element>(x: &Tensor<E>) -> Result<[usize; 3]> {
    x.shape().try_into().map_err(|_| {
        Error::Shape(format!(
            "expected a 3-D [C, H, W] tensor, got {:?}",
            x.shape()
        ))
    })
}
