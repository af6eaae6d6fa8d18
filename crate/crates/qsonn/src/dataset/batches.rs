//! Shuffled mini-batch index streams.

use super::SplitFeatures;
use crate::rng::{combine, SplitMix64};
use crate::tensor::Tensor;

/// Index batches covering `0..len` exactly once, shuffled by
/// `(epoch_seed, epoch)`; the final short batch is emitted as-is.
pub fn epoch_batches(
    len: usize,
    batch_size: usize,
    epoch_seed: u64,
    epoch: u32,
) -> Vec<Vec<usize>> {
    assert!(batch_size > 0, "batch size must be positive");
    let mut order: Vec<usize> = (0..len).collect();
    let mut rng = SplitMix64::new(combine(&[epoch_seed, 0xBA7C, epoch as u64]));
    rng.shuffle(&mut order);
    order.chunks(batch_size).map(|c| c.to_vec()).collect()
}

/// Stack the indexed features into a `[B, ...feature dims]` tensor plus the
/// matching labels.
pub fn assemble_batch(split: &SplitFeatures, indices: &[usize]) -> (Tensor<f32>, Vec<u32>) {
    assert!(!indices.is_empty(), "cannot assemble an empty batch");
    let feat_shape = split.features[indices[0]].shape().to_vec();
    let numel: usize = feat_shape.iter().product();
    let mut shape = vec![indices.len()];
    shape.extend_from_slice(&feat_shape);
    let mut data = Vec::with_capacity(indices.len() * numel);
    let mut labels = Vec::with_capacity(indices.len());
    for &i in indices {
        data.extend_from_slice(split.features[i].data());
        labels.push(split.labels[i]);
    }
    (Tensor::from_vec(&shape, data), labels)
}
