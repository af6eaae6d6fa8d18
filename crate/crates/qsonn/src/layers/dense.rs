//! Fully connected layer over the flattened feature map: `y = W x + b`.

use crate::error::{Error, Result};
use crate::tensor::{Element, Tensor};

#[derive(Debug, Clone)]
pub struct DenseParams<E: Element = f32> {
    /// `[out, in]`.
    pub weights: Tensor<E>,
    /// `[out]`.
    pub bias: Tensor<E>,
}

#[derive(Debug, Clone)]
pub struct DenseGrads<E: Element = f32> {
    pub weights: Tensor<E>,
    pub bias: Tensor<E>,
}

impl<E: Element> DenseParams<E> {
    pub fn zeros(out_dim: usize, in_dim: usize) -> Self {
        DenseParams {
            weights: Tensor::zeros(&[out_dim, in_dim]),
            bias: Tensor::zeros(&[out_dim]),
        }
    }

    pub fn out_dim(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn in_dim(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn zero_grads(&self) -> DenseGrads<E> {
        DenseGrads {
            weights: self.weights.zeros_like(),
            bias: self.bias.zeros_like(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.numel() + self.bias.numel()
    }
}

pub fn dense_forward<E: Element>(x: &Tensor<E>, p: &DenseParams<E>) -> Result<Tensor<E>> {
    if x.numel() != p.in_dim() {
        return Err(Error::Shape(format!(
            "dense layer expects {} inputs, got {}",
            p.in_dim(),
            x.numel()
        )));
    }
    let w = p.weights.data();
    let xs = x.data();
    let data = p
        .bias
        .data()
        .iter()
        .enumerate()
        .map(|(o, &b)| {
            let row = &w[o * p.in_dim()..(o + 1) * p.in_dim()];
            let mut acc = E::ZERO;
            for (&wv, &xv) in row.iter().zip(xs) {
                acc += wv * xv;
            }
            acc + b
        })
        .collect();
    Ok(Tensor::from_vec(&[p.out_dim()], data))
}

pub fn dense_backward<E: Element>(
    x: &Tensor<E>,
    p: &DenseParams<E>,
    grad_out: &Tensor<E>,
) -> Result<(Tensor<E>, DenseGrads<E>)> {
    if grad_out.numel() != p.out_dim() {
        return Err(Error::Shape(format!(
            "dense grad_out has {} elements, expected {}",
            grad_out.numel(),
            p.out_dim()
        )));
    }
    if x.numel() != p.in_dim() {
        return Err(Error::Shape(format!(
            "dense layer expects {} inputs, got {}",
            p.in_dim(),
            x.numel()
        )));
    }
    let mut grads = p.zero_grads();
    let (out_dim, in_dim) = (p.out_dim(), p.in_dim());
    let g = grad_out.data();
    let xs = x.data();
    let gw = grads.weights.data_mut();
    for o in 0..out_dim {
        let row = &mut gw[o * in_dim..(o + 1) * in_dim];
        for (d, &xv) in row.iter_mut().zip(xs) {
            *d = g[o] * xv;
        }
    }
    grads.bias.data_mut().copy_from_slice(g);

    let w = p.weights.data();
    let mut grad_x = vec![E::ZERO; in_dim];
    for o in 0..out_dim {
        let row = &w[o * in_dim..(o + 1) * in_dim];
        for (d, &wv) in grad_x.iter_mut().zip(row) {
            *d += g[o] * wv;
        }
    }
    Ok((Tensor::from_vec(&[in_dim], grad_x), grads))
}
