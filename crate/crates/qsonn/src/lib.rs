//! From-scratch operational neural network layers for lightweight speech
//! command recognition.
//!
//! The crate implements three interchangeable convolution-style layer
//! families and everything needed to train and compare them on spoken
//! command classification:
//!
//! - an ordinary convolutional layer,
//! - a self-organized operational layer that learns its nodal function as a
//!   truncated power series (per-power weight vectors),
//! - a quadratic self-organized operational layer that adds a learnable
//!   block-diagonal quadratic form per power, capturing cross-correlations
//!   inside each receptive field.
//!
//! Around the layers sit an MFCC audio frontend (16 kHz mono WAV in, a
//! normalized 20x51 feature map out), a small two-layer network with max
//! pooling, tanh, dropout and a dense head, dataset ingestion with
//! deterministic splits and a binary feature cache, SGD-with-momentum
//! training with early stopping, and analytic parameter/MAC cost accounting.
//!
//! All backward passes are hand-derived and verified against 64-bit central
//! finite differences; there is no autodiff graph and no runtime dependency.
//! Every source of randomness is seeded, so training runs are bit-for-bit
//! reproducible.
//!
//! # Quick start
//!
//! ```
//! use qsonn::model::{build_model, LayerKind, ModelSpec};
//! use qsonn::tensor::Tensor;
//!
//! # fn main() -> qsonn::Result<()> {
//! // quadratic operational model with a power series truncated at Q = 3
//! let spec = ModelSpec::speech_default(LayerKind::QSelfOnn, 3);
//! let mut model = build_model(&spec)?;
//! model.init_params(42);
//!
//! // one MFCC feature map in, ten command logits out
//! let feature = Tensor::zeros(&[1, 20, 51]);
//! let logits = model.infer(&feature)?;
//! assert_eq!(logits.shape(), &[10]);
//! # Ok(())
//! # }
//! ```

pub mod audio;
pub mod dataset;
pub mod error;
pub mod layers;
pub mod model;
pub mod rng;
pub mod tensor;
pub mod training;

pub use error::{Error, Result};
pub use tensor::{KernelSpec, Tensor};
