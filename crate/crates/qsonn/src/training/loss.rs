//! Softmax cross-entropy over the class logits.

use crate::tensor::Tensor;

/// Loss and its gradient with respect to the logits, computed with the
/// log-sum-exp shift for stability.
pub fn softmax_cross_entropy(logits: &Tensor<f32>, label: u32) -> (f32, Tensor<f32>) {
    let z = logits.data();
    debug_assert!((label as usize) < z.len(), "label out of range");
    let max = z.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let exps: Vec<f32> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: f32 = exps.iter().sum();
    let loss = max + sum.ln() - z[label as usize];
    let grad: Vec<f32> = exps
        .iter()
        .enumerate()
        .map(|(i, &e)| e / sum - if i == label as usize { 1.0 } else { 0.0 })
        .collect();
    (loss, Tensor::from_vec(logits.shape(), grad))
}
