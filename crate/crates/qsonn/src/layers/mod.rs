//! Forward and backward passes for every layer type in the network.
//!
//! All backward passes are hand-derived; the tests in this module and the
//! gradient-check harness in [`crate::training`] verify each one against
//! 64-bit central finite differences.

mod activation;
mod conv;
mod dense;
mod dropout;
mod pool;
mod qselfonn;

pub use activation::{tanh_backward, tanh_forward};
pub use conv::{
    conv2d_backward, conv2d_backward_cached, conv2d_forward, conv2d_forward_cached, ConvCache,
    ConvGrads, ConvParams,
};
pub use dense::{dense_backward, dense_forward, DenseGrads, DenseParams};
pub use dropout::{dropout_backward, dropout_forward, DropoutCtx};
pub use pool::{maxpool_backward, maxpool_forward, MaxPoolCache};
pub use qselfonn::{
    fold_to_upper_triangular, qselfonn_backward, qselfonn_backward_cached, qselfonn_forward,
    qselfonn_forward_cached, selfonn_forward, QSelfOnnCache, QSelfOnnGrads, QSelfOnnParams,
    QuadMode,
};
