//! Ordinary convolutional layer: `y(i,j) = w^T x_(i,j) + b`.
//!
//! Shares the patch-matrix primitives with the operational layers, so an
//! operational layer degenerated to `Q = 1` with no quadratic term computes
//! the identical instruction sequence and matches bit-for-bit.

use crate::error::{Error, Result};
use crate::tensor::{
    extract_patches, matmul, scatter_patches, transpose, Element, KernelSpec, Tensor,
};

/// Learnable state of a convolutional layer.
#[derive(Debug, Clone)]
pub struct ConvParams<E: Element = f32> {
    /// `[C_out, C_in, kh, kw]`, vectorizing channel-major like patches.
    pub weights: Tensor<E>,
    /// `[C_out]`.
    pub bias: Tensor<E>,
}

/// Gradients of a [`ConvParams`], same shapes.
#[derive(Debug, Clone)]
pub struct ConvGrads<E: Element = f32> {
    pub weights: Tensor<E>,
    pub bias: Tensor<E>,
}

impl<E: Element> ConvParams<E> {
    pub fn zeros(c_out: usize, c_in: usize, spec: &KernelSpec) -> Self {
        ConvParams {
            weights: Tensor::zeros(&[c_out, c_in, spec.kernel_h, spec.kernel_w]),
            bias: Tensor::zeros(&[c_out]),
        }
    }

    pub fn c_out(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn c_in(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn validate(&self, spec: &KernelSpec) -> Result<()> {
        let w = self.weights.shape();
        if w.len() != 4 || w[2] != spec.kernel_h || w[3] != spec.kernel_w {
            return Err(Error::Shape(format!(
                "conv weights {w:?} inconsistent with kernel {}x{}",
                spec.kernel_h, spec.kernel_w
            )));
        }
        if self.bias.shape() != [w[0]] {
            return Err(Error::Shape(format!(
                "conv bias {:?} inconsistent with C_out={}",
                self.bias.shape(),
                w[0]
            )));
        }
        Ok(())
    }

    pub fn zero_grads(&self) -> ConvGrads<E> {
        ConvGrads {
            weights: self.weights.zeros_like(),
            bias: self.bias.zeros_like(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.numel() + self.bias.numel()
    }
}

/// Forward state for [`conv2d_backward_cached`].
pub struct ConvCache<E: Element> {
    patches: Tensor<E>,
    input_shape: [usize; 3],
    out_hw: (usize, usize),
}

/// Forward pass keeping the patch matrix for backprop.
pub fn conv2d_forward_cached<E: Element>(
    x: &Tensor<E>,
    p: &ConvParams<E>,
    spec: &KernelSpec,
) -> Result<(Tensor<E>, ConvCache<E>)> {
    p.validate(spec)?;
    let input_shape: [usize; 3] = x.shape().try_into().map_err(|_| {
        Error::Shape(format!(
            "expected a 3-D [C, H, W] input, got {:?}",
            x.shape()
        ))
    })?;
    if input_shape[0] != p.c_in() {
        return Err(Error::Shape(format!(
            "input has {} channels but the layer expects {}",
            input_shape[0],
            p.c_in()
        )));
    }
    let (out_h, out_w) = spec.output_size(input_shape[1], input_shape[2])?;
    let positions = out_h * out_w;
    let c_out = p.c_out();
    let row_len = p.c_in() * spec.receptive_field();

    let patches = extract_patches(x, spec)?;
    let w_t = transpose(p.weights.data(), c_out, row_len);
    let mut out_mat = matmul(patches.data(), positions, row_len, &w_t, c_out);
    let bias = p.bias.data();
    for pos in 0..positions {
        for co in 0..c_out {
            out_mat[pos * c_out + co] += bias[co];
        }
    }
    let out = Tensor::from_vec(
        &[c_out, out_h, out_w],
        transpose(&out_mat, positions, c_out),
    );
    Ok((
        out,
        ConvCache {
            patches,
            input_shape,
            out_hw: (out_h, out_w),
        },
    ))
}

pub fn conv2d_forward<E: Element>(
    x: &Tensor<E>,
    p: &ConvParams<E>,
    spec: &KernelSpec,
) -> Result<Tensor<E>> {
    conv2d_forward_cached(x, p, spec).map(|(y, _)| y)
}

pub fn conv2d_backward_cached<E: Element>(
    cache: &ConvCache<E>,
    p: &ConvParams<E>,
    spec: &KernelSpec,
    grad_out: &Tensor<E>,
) -> Result<(Tensor<E>, ConvGrads<E>)> {
    let c_out = p.c_out();
    let (out_h, out_w) = cache.out_hw;
    let positions = out_h * out_w;
    let row_len = p.c_in() * spec.receptive_field();
    if grad_out.shape() != [c_out, out_h, out_w] {
        return Err(Error::Shape(format!(
            "grad_out shape {:?} does not match forward output [{c_out}, {out_h}, {out_w}]",
            grad_out.shape()
        )));
    }

    let g = grad_out.data();
    let mut grads = p.zero_grads();
    for co in 0..c_out {
        let mut acc = E::ZERO;
        for pos in 0..positions {
            acc += g[co * positions + pos];
        }
        grads.bias.data_mut()[co] = acc;
    }
    let gw = matmul(g, c_out, positions, cache.patches.data(), row_len);
    grads.weights.data_mut().copy_from_slice(&gw);

    let g_t = transpose(g, c_out, positions);
    let grad_patches = matmul(&g_t, positions, c_out, p.weights.data(), row_len);
    let grad_patches = Tensor::from_vec(&[positions, row_len], grad_patches);
    let grad_x = scatter_patches(&grad_patches, &cache.input_shape, spec)?;
    Ok((grad_x, grads))
}

pub fn conv2d_backward<E: Element>(
    x: &Tensor<E>,
    p: &ConvParams<E>,
    spec: &KernelSpec,
    grad_out: &Tensor<E>,
) -> Result<(Tensor<E>, ConvGrads<E>)> {
    let (_, cache) = conv2d_forward_cached(x, p, spec)?;
    conv2d_backward_cached(&cache, p, spec, grad_out)
}
