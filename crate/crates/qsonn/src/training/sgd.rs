//! Classical SGD with momentum: `v <- momentum * v - lr * g; p <- p + v`.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// One optimizer step over parallel parameter / gradient / velocity lists.
pub fn sgd_step(
    params: &mut [&mut Tensor<f32>],
    grads: &[&Tensor<f32>],
    velocity: &mut [Tensor<f32>],
    lr: f32,
    momentum: f32,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != velocity.len() {
        return Err(Error::Shape(format!(
            "sgd_step got {} params, {} grads, {} velocity tensors",
            params.len(),
            grads.len(),
            velocity.len()
        )));
    }
    for ((p, g), v) in params.iter_mut().zip(grads).zip(velocity.iter_mut()) {
        if p.shape() != g.shape() || p.shape() != v.shape() {
            return Err(Error::Shape(format!(
                "sgd_step shape mismatch: param {:?}, grad {:?}, velocity {:?}",
                p.shape(),
                g.shape(),
                v.shape()
            )));
        }
        for ((pv, &gv), vv) in p.data_mut().iter_mut().zip(g.data()).zip(v.data_mut()) {
            *vv = momentum * *vv - lr * gv;
            *pv += *vv;
        }
    }
    Ok(())
}
