//! Hyperbolic tangent activation.

use crate::tensor::{Element, Tensor};

pub fn tanh_forward<E: Element>(x: &Tensor<E>) -> Tensor<E> {
    x.map(|v| v.tanh())
}

/// Backward from the forward *output*: `dy/dx = 1 - y^2`.
pub fn tanh_backward<E: Element>(y: &Tensor<E>, grad_out: &Tensor<E>) -> Tensor<E> {
    assert_eq!(y.shape(), grad_out.shape(), "tanh grad shape mismatch");
    let data = y
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&yv, &g)| g * (E::ONE - yv * yv))
        .collect();
    Tensor::from_vec(y.shape(), data)
}
