//! Inverted dropout with counter-based randomness.
//!
//! The keep/drop decision for element `i` of a given layer at a given
//! training step is a pure function of `(seed, layer_id, step, i)`, so a
//! resumed run regenerates exactly the masks of the uninterrupted one and
//! evaluation never consumes RNG state.

use crate::rng::unit_from_counter;
use crate::tensor::{Element, Tensor};

/// Identifies one dropout site's random stream within a model.
#[derive(Debug, Clone, Copy)]
pub struct DropoutCtx {
    pub seed: u64,
    pub layer_id: u64,
    pub step: u64,
}

/// Training-mode dropout: each element is zeroed independently with
/// probability `rate`; survivors are scaled by `1 / (1 - rate)` so
/// evaluation is an identity. Returns the output and the applied mask.
pub fn dropout_forward<E: Element>(
    x: &Tensor<E>,
    rate: f64,
    ctx: DropoutCtx,
) -> (Tensor<E>, Vec<bool>) {
    assert!((0.0..1.0).contains(&rate), "dropout rate must be in [0, 1)");
    if rate == 0.0 {
        return (x.clone(), vec![true; x.numel()]);
    }
    let scale = E::from_f64(1.0 / (1.0 - rate));
    let mask: Vec<bool> = (0..x.numel())
        .map(|i| unit_from_counter(ctx.seed, ctx.layer_id, ctx.step, i as u64) >= rate)
        .collect();
    let data = x
        .data()
        .iter()
        .zip(&mask)
        .map(|(&v, &keep)| if keep { v * scale } else { E::ZERO })
        .collect();
    (Tensor::from_vec(x.shape(), data), mask)
}

/// Route gradients through the surviving elements with the same scale.
pub fn dropout_backward<E: Element>(grad_out: &Tensor<E>, mask: &[bool], rate: f64) -> Tensor<E> {
    assert_eq!(grad_out.numel(), mask.len(), "dropout mask length mismatch");
    if rate == 0.0 {
        return grad_out.clone();
    }
    let scale = E::from_f64(1.0 / (1.0 - rate));
    let data = grad_out
        .data()
        .iter()
        .zip(mask)
        .map(|(&g, &keep)| if keep { g * scale } else { E::ZERO })
        .collect();
    Tensor::from_vec(grad_out.shape(), data)
}
