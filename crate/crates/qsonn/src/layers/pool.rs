//! Max pooling with floor-mode output extents (trailing rows/columns that
//! do not fill a window are dropped).

use crate::error::{Error, Result};
use crate::tensor::{Element, Tensor};

/// Forward state: the flat input index that won each window,
/// first-occurrence tie-break.
pub struct MaxPoolCache {
    argmax: Vec<usize>,
    input_shape: Vec<usize>,
}

/// Non-overlapping max pool (`pool_h x pool_w`, given stride) over a
/// `[C, H, W]` input.
pub fn maxpool_forward<E: Element>(
    x: &Tensor<E>,
    pool_h: usize,
    pool_w: usize,
    stride: usize,
) -> Result<(Tensor<E>, MaxPoolCache)> {
    let [c, h, w]: [usize; 3] = x
        .shape()
        .try_into()
        .map_err(|_| Error::Shape(format!("expected a 3-D input, got {:?}", x.shape())))?;
    if pool_h > h || pool_w > w {
        return Err(Error::Shape(format!(
            "pool window {pool_h}x{pool_w} exceeds input {h}x{w}"
        )));
    }
    if pool_h == 0 || pool_w == 0 || stride == 0 {
        return Err(Error::Shape(
            "pool window and stride must be positive".into(),
        ));
    }
    let out_h = (h - pool_h) / stride + 1;
    let out_w = (w - pool_w) / stride + 1;

    let src = x.data();
    let mut data = Vec::with_capacity(c * out_h * out_w);
    let mut argmax = Vec::with_capacity(c * out_h * out_w);
    for ch in 0..c {
        let chan = ch * h * w;
        for oi in 0..out_h {
            for oj in 0..out_w {
                let mut best_idx = chan + (oi * stride) * w + oj * stride;
                let mut best = src[best_idx];
                for ki in 0..pool_h {
                    for kj in 0..pool_w {
                        let idx = chan + (oi * stride + ki) * w + (oj * stride + kj);
                        if src[idx] > best {
                            best = src[idx];
                            best_idx = idx;
                        }
                    }
                }
                data.push(best);
                argmax.push(best_idx);
            }
        }
    }
    Ok((
        Tensor::from_vec(&[c, out_h, out_w], data),
        MaxPoolCache {
            argmax,
            input_shape: x.shape().to_vec(),
        },
    ))
}

/// Route each output gradient to the stored argmax position.
pub fn maxpool_backward<E: Element>(
    cache: &MaxPoolCache,
    grad_out: &Tensor<E>,
) -> Result<Tensor<E>> {
    if grad_out.numel() != cache.argmax.len() {
        return Err(Error::Shape(format!(
            "grad_out has {} elements but the pool produced {}",
            grad_out.numel(),
            cache.argmax.len()
        )));
    }
    let mut grad_x = Tensor::zeros(&cache.input_shape);
    let dst = grad_x.data_mut();
    for (&idx, &g) in cache.argmax.iter().zip(grad_out.data()) {
        dst[idx] += g;
    }
    Ok(grad_x)
}
