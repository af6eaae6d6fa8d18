//! Network assembly: the two-operational-layer classifier, its
//! initialization, serialization, and cost accounting.
//!
//! The architecture follows the small LeNet-style chain
//! `op(1->20) -> pool -> tanh -> dropout -> op(20->20) -> pool -> tanh ->
//! dropout -> flatten -> dense(->10)`, where each `op` slot is an ordinary
//! convolution, a power-series layer, or a quadratic operational layer
//! depending on [`ModelSpec::layer_kind`].

mod checkpoint;
mod costs;

pub use checkpoint::{
    load_checkpoint, load_checkpoint_expecting, save_checkpoint, save_checkpoint_with_state,
    TrainState,
};
pub use costs::{count_costs, CostReport, LayerCost};

use crate::error::{Error, Result};
use crate::layers::{
    conv2d_backward_cached, conv2d_forward_cached, dense_backward, dense_forward, dropout_backward,
    dropout_forward, maxpool_backward, maxpool_forward, qselfonn_backward_cached,
    qselfonn_forward_cached, tanh_backward, tanh_forward, ConvCache, ConvGrads, ConvParams,
    DenseGrads, DenseParams, DropoutCtx, MaxPoolCache, QSelfOnnCache, QSelfOnnGrads,
    QSelfOnnParams, QuadMode,
};
use crate::rng::{combine, SplitMix64};
use crate::tensor::{KernelSpec, Tensor};

/// Which family fills the two operational slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Conv,
    SelfOnn,
    QSelfOnn,
}

impl LayerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LayerKind::Conv => "conv",
            LayerKind::SelfOnn => "selfonn",
            LayerKind::QSelfOnn => "qselfonn",
        }
    }
}

impl std::str::FromStr for LayerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conv" => Ok(LayerKind::Conv),
            "selfonn" => Ok(LayerKind::SelfOnn),
            "qselfonn" => Ok(LayerKind::QSelfOnn),
            other => Err(Error::Config(format!(
                "unknown layer kind '{other}' (expected conv, selfonn or qselfonn)"
            ))),
        }
    }
}

/// Complete architectural description of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub layer_kind: LayerKind,
    /// Power-series truncation order; must be 1 for `Conv`.
    pub q_max: usize,
    /// Quadratic-term structure; `Off` for `Conv` and `SelfOnn`.
    pub quad_mode: QuadMode,
    /// Output channels of the two operational layers.
    pub channels: [usize; 2],
    /// Classes in the dense head.
    pub fc_out: usize,
    pub kernel: KernelSpec,
    /// Square non-overlapping pooling window (and stride).
    pub pool_size: usize,
    pub dropout_rate: f64,
    /// `[C, H, W]` of the feature map the network consumes.
    pub input_shape: [usize; 3],
}

impl ModelSpec {
    /// The configuration used for speech commands: 20/20 channels, 10
    /// classes, 3x3 kernel with padding 2, 2x2 pooling, dropout 0.2, and a
    /// `[1, 20, 51]` MFCC input.
    pub fn speech_default(layer_kind: LayerKind, q_max: usize) -> Self {
        let quad_mode = match layer_kind {
            LayerKind::QSelfOnn => QuadMode::FullBlock,
            _ => QuadMode::Off,
        };
        ModelSpec {
            layer_kind,
            q_max: if layer_kind == LayerKind::Conv {
                1
            } else {
                q_max
            },
            quad_mode,
            channels: [20, 20],
            fc_out: 10,
            kernel: KernelSpec::default_3x3_pad2(),
            pool_size: 2,
            dropout_rate: 0.2,
            input_shape: [1, 20, 51],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.q_max < 1 {
            return Err(Error::Config("q_max must be >= 1".into()));
        }
        if self.layer_kind == LayerKind::Conv && self.q_max != 1 {
            return Err(Error::Config(format!(
                "a conv model has no power series; q_max must be 1 (got {})",
                self.q_max
            )));
        }
        match (self.layer_kind, self.quad_mode) {
            (LayerKind::Conv | LayerKind::SelfOnn, QuadMode::Off) => {}
            (LayerKind::Conv | LayerKind::SelfOnn, _) => {
                return Err(Error::Config(format!(
                    "{} models cannot carry a quadratic term",
                    self.layer_kind.as_str()
                )));
            }
            (LayerKind::QSelfOnn, QuadMode::Off) => {
                return Err(Error::Config(
                    "a qselfonn model needs quad_mode upper-triangular or full-block; use selfonn for quad off"
                        .into(),
                ));
            }
            (LayerKind::QSelfOnn, _) => {}
        }
        if self.channels[0] == 0 || self.channels[1] == 0 || self.fc_out == 0 {
            return Err(Error::Config(
                "channel and class counts must be positive".into(),
            ));
        }
        if self.pool_size == 0 {
            return Err(Error::Config("pool size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Config(format!(
                "dropout rate must be in [0, 1), got {}",
                self.dropout_rate
            )));
        }
        self.geometry()?;
        Ok(())
    }

    /// Every intermediate shape of the chain. The default speech geometry
    /// runs 20x51 -> 22x53 -> 11x26 -> 13x28 -> 6x14, giving the dense layer
    /// a fan-in of 20*6*14 = 1680.
    pub fn geometry(&self) -> Result<Geometry> {
        let [_, h0, w0] = self.input_shape;
        let (h1, w1) = self.kernel.output_size(h0, w0)?;
        let (ph1, pw1) = pooled(h1, w1, self.pool_size)?;
        let (h2, w2) = self.kernel.output_size(ph1, pw1)?;
        let (ph2, pw2) = pooled(h2, w2, self.pool_size)?;
        Ok(Geometry {
            conv1_out: [self.channels[0], h1, w1],
            pool1_out: [self.channels[0], ph1, pw1],
            conv2_out: [self.channels[1], h2, w2],
            pool2_out: [self.channels[1], ph2, pw2],
            dense_in: self.channels[1] * ph2 * pw2,
        })
    }
}

fn pooled(h: usize, w: usize, pool: usize) -> Result<(usize, usize)> {
    if pool > h || pool > w {
        return Err(Error::Config(format!(
            "pool window {pool} exceeds feature map {h}x{w}"
        )));
    }
    Ok((h / pool, w / pool))
}

/// Intermediate shapes of the layer chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Geometry {
    pub conv1_out: [usize; 3],
    pub pool1_out: [usize; 3],
    pub conv2_out: [usize; 3],
    pub pool2_out: [usize; 3],
    pub dense_in: usize,
}

/// One operational slot: either a convolution or an operational layer.
#[derive(Debug, Clone)]
pub enum OpLayer {
    Conv(ConvParams<f32>),
    Onn(QSelfOnnParams<f32>),
}

impl OpLayer {
    fn param_count(&self) -> usize {
        match self {
            OpLayer::Conv(p) => p.param_count(),
            OpLayer::Onn(p) => p.param_count(),
        }
    }
}

/// Gradients for one operational slot.
pub enum OpGrads {
    Conv(ConvGrads<f32>),
    Onn(QSelfOnnGrads<f32>),
}

enum OpCache {
    Conv(ConvCache<f32>),
    Onn(QSelfOnnCache<f32>),
}

/// The assembled network.
#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    layer1: OpLayer,
    layer2: OpLayer,
    dense: DenseParams<f32>,
}

/// Everything the backward pass needs from a training-mode forward pass.
pub struct ForwardTrace {
    l1: OpCache,
    pool1: MaxPoolCache,
    tanh1_out: Tensor<f32>,
    drop1_mask: Vec<bool>,
    l2: OpCache,
    pool2: MaxPoolCache,
    tanh2_out: Tensor<f32>,
    drop2_mask: Vec<bool>,
    flat: Tensor<f32>,
}

/// Gradients for the whole model, in the same structure as its parameters.
pub struct ModelGrads {
    pub layer1: OpGrads,
    pub layer2: OpGrads,
    pub dense: DenseGrads<f32>,
}

fn build_op(
    kind: LayerKind,
    q_max: usize,
    quad_mode: QuadMode,
    c_out: usize,
    c_in: usize,
    spec: &KernelSpec,
) -> OpLayer {
    match kind {
        LayerKind::Conv => OpLayer::Conv(ConvParams::zeros(c_out, c_in, spec)),
        LayerKind::SelfOnn | LayerKind::QSelfOnn => {
            OpLayer::Onn(QSelfOnnParams::zeros(q_max, c_out, c_in, spec, quad_mode))
        }
    }
}

/// Build a zero-initialized model from a validated spec.
pub fn build_model(spec: &ModelSpec) -> Result<Model> {
    spec.validate()?;
    let geo = spec.geometry()?;
    let layer1 = build_op(
        spec.layer_kind,
        spec.q_max,
        spec.quad_mode,
        spec.channels[0],
        spec.input_shape[0],
        &spec.kernel,
    );
    let layer2 = build_op(
        spec.layer_kind,
        spec.q_max,
        spec.quad_mode,
        spec.channels[1],
        spec.channels[0],
        &spec.kernel,
    );
    let dense = DenseParams::zeros(spec.fc_out, geo.dense_in);
    Ok(Model {
        spec: spec.clone(),
        layer1,
        layer2,
        dense,
    })
}

impl Model {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn layer1(&self) -> &OpLayer {
        &self.layer1
    }

    pub fn layer1_mut(&mut self) -> &mut OpLayer {
        &mut self.layer1
    }

    pub fn layer2(&self) -> &OpLayer {
        &self.layer2
    }

    pub fn layer2_mut(&mut self) -> &mut OpLayer {
        &mut self.layer2
    }

    pub fn dense(&self) -> &DenseParams<f32> {
        &self.dense
    }

    pub fn dense_mut(&mut self) -> &mut DenseParams<f32> {
        &mut self.dense
    }

    /// Total learnable parameters.
    pub fn param_count(&self) -> usize {
        self.layer1.param_count() + self.layer2.param_count() + self.dense.param_count()
    }

    /// Draw every weight from `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`, with the
    /// weights for power `q` and all quadratic blocks additionally scaled by
    /// `1/q` to temper high-order terms at the start. Biases start at zero.
    /// Fully determined by `seed`.
    pub fn init_params(&mut self, seed: u64) {
        let mut rng = SplitMix64::new(combine(&[seed, 0x1217]));
        let kernel = self.spec.kernel;
        for layer in [&mut self.layer1, &mut self.layer2] {
            match layer {
                OpLayer::Conv(p) => {
                    let bound = 1.0 / ((p.c_in() * kernel.receptive_field()) as f64).sqrt();
                    for v in p.weights.data_mut() {
                        *v = rng.uniform(-bound, bound) as f32;
                    }
                    for v in p.bias.data_mut() {
                        *v = 0.0;
                    }
                }
                OpLayer::Onn(p) => {
                    let fan = (p.c_in() * kernel.receptive_field()) as f64;
                    let bound = 1.0 / fan.sqrt();
                    let (q_max, c_out, c_in) = (p.q_max, p.c_out(), p.c_in());
                    let n = kernel.receptive_field();
                    let lw = p.linear_weights.data_mut();
                    for q in 0..q_max {
                        let b = bound / (q + 1) as f64;
                        for v in &mut lw[q * c_out * c_in * n..(q + 1) * c_out * c_in * n] {
                            *v = rng.uniform(-b, b) as f32;
                        }
                    }
                    if p.quad_mode != QuadMode::Off {
                        let qb = p.quad_blocks.data_mut();
                        for q in 0..q_max {
                            let b = bound / (q + 1) as f64;
                            let span = c_out * c_in * n * n;
                            for v in &mut qb[q * span..(q + 1) * span] {
                                *v = rng.uniform(-b, b) as f32;
                            }
                        }
                    }
                    for v in p.bias.data_mut() {
                        *v = 0.0;
                    }
                    p.enforce_mode();
                }
            }
        }
        let bound = 1.0 / (self.dense.in_dim() as f64).sqrt();
        for v in self.dense.weights.data_mut() {
            *v = rng.uniform(-bound, bound) as f32;
        }
        for v in self.dense.bias.data_mut() {
            *v = 0.0;
        }
    }

    /// Named parameter tensors in canonical order.
    pub fn named_params(&self) -> Vec<(String, &Tensor<f32>)> {
        let mut out = Vec::new();
        for (prefix, layer) in [("layer1", &self.layer1), ("layer2", &self.layer2)] {
            match layer {
                OpLayer::Conv(p) => {
                    out.push((format!("{prefix}.weight"), &p.weights));
                    out.push((format!("{prefix}.bias"), &p.bias));
                }
                OpLayer::Onn(p) => {
                    out.push((format!("{prefix}.linear"), &p.linear_weights));
                    out.push((format!("{prefix}.blocks"), &p.quad_blocks));
                    out.push((format!("{prefix}.bias"), &p.bias));
                }
            }
        }
        out.push(("dense.weight".to_string(), &self.dense.weights));
        out.push(("dense.bias".to_string(), &self.dense.bias));
        out
    }

    /// Mutable parameter tensors in the same canonical order as
    /// [`Model::named_params`].
    pub fn params_mut(&mut self) -> Vec<&mut Tensor<f32>> {
        let mut out: Vec<&mut Tensor<f32>> = Vec::new();
        for layer in [&mut self.layer1, &mut self.layer2] {
            match layer {
                OpLayer::Conv(p) => {
                    out.push(&mut p.weights);
                    out.push(&mut p.bias);
                }
                OpLayer::Onn(p) => {
                    out.push(&mut p.linear_weights);
                    out.push(&mut p.quad_blocks);
                    out.push(&mut p.bias);
                }
            }
        }
        out.push(&mut self.dense.weights);
        out.push(&mut self.dense.bias);
        out
    }

    /// Re-apply mode constraints after an external parameter update
    /// (upper-triangular blocks stay upper-triangular, off-mode blocks stay
    /// zero).
    pub fn enforce_modes(&mut self) {
        for layer in [&mut self.layer1, &mut self.layer2] {
            if let OpLayer::Onn(p) = layer {
                p.enforce_mode();
            }
        }
    }

    fn op_forward(
        layer: &OpLayer,
        x: &Tensor<f32>,
        kernel: &KernelSpec,
    ) -> Result<(Tensor<f32>, OpCache)> {
        match layer {
            OpLayer::Conv(p) => {
                let (y, c) = conv2d_forward_cached(x, p, kernel)?;
                Ok((y, OpCache::Conv(c)))
            }
            OpLayer::Onn(p) => {
                let (y, c) = qselfonn_forward_cached(x, p, kernel)?;
                Ok((y, OpCache::Onn(c)))
            }
        }
    }

    fn op_backward(
        layer: &OpLayer,
        cache: &OpCache,
        kernel: &KernelSpec,
        grad_out: &Tensor<f32>,
    ) -> Result<(Tensor<f32>, OpGrads)> {
        match (layer, cache) {
            (OpLayer::Conv(p), OpCache::Conv(c)) => {
                let (gx, g) = conv2d_backward_cached(c, p, kernel, grad_out)?;
                Ok((gx, OpGrads::Conv(g)))
            }
            (OpLayer::Onn(p), OpCache::Onn(c)) => {
                let (gx, g) = qselfonn_backward_cached(c, p, kernel, grad_out)?;
                Ok((gx, OpGrads::Onn(g)))
            }
            _ => Err(Error::Shape("layer/cache kind mismatch".into())),
        }
    }

    /// Training-mode forward pass: dropout active, trace retained.
    /// `step` must be unique per forward pass for independent masks.
    pub fn forward_train(
        &self,
        x: &Tensor<f32>,
        seed: u64,
        step: u64,
    ) -> Result<(Tensor<f32>, ForwardTrace)> {
        let kernel = &self.spec.kernel;
        let pool = self.spec.pool_size;
        let rate = self.spec.dropout_rate;

        let (y1, l1) = Self::op_forward(&self.layer1, x, kernel)?;
        let (p1, pool1) = maxpool_forward(&y1, pool, pool, pool)?;
        let t1 = tanh_forward(&p1);
        let (d1, drop1_mask) = dropout_forward(
            &t1,
            rate,
            DropoutCtx {
                seed,
                layer_id: 1,
                step,
            },
        );

        let (y2, l2) = Self::op_forward(&self.layer2, &d1, kernel)?;
        let (p2, pool2) = maxpool_forward(&y2, pool, pool, pool)?;
        let t2 = tanh_forward(&p2);
        let (d2, drop2_mask) = dropout_forward(
            &t2,
            rate,
            DropoutCtx {
                seed,
                layer_id: 2,
                step,
            },
        );

        let flat = d2.reshape(&[d2.numel()])?;
        let logits = dense_forward(&flat, &self.dense)?;
        Ok((
            logits,
            ForwardTrace {
                l1,
                pool1,
                tanh1_out: t1,
                drop1_mask,
                l2,
                pool2,
                tanh2_out: t2,
                drop2_mask,
                flat,
            },
        ))
    }

    /// Evaluation-mode forward pass: dropout is an identity.
    pub fn infer(&self, x: &Tensor<f32>) -> Result<Tensor<f32>> {
        let kernel = &self.spec.kernel;
        let pool = self.spec.pool_size;
        let (y1, _) = Self::op_forward(&self.layer1, x, kernel)?;
        let (p1, _) = maxpool_forward(&y1, pool, pool, pool)?;
        let t1 = tanh_forward(&p1);
        let (y2, _) = Self::op_forward(&self.layer2, &t1, kernel)?;
        let (p2, _) = maxpool_forward(&y2, pool, pool, pool)?;
        let t2 = tanh_forward(&p2);
        let flat = t2.reshape(&[t2.numel()])?;
        dense_forward(&flat, &self.dense)
    }

    /// Backward pass through the whole chain from the gradient of the loss
    /// with respect to the logits.
    pub fn backward(&self, trace: &ForwardTrace, grad_logits: &Tensor<f32>) -> Result<ModelGrads> {
        let kernel = &self.spec.kernel;
        let rate = self.spec.dropout_rate;

        let (g_flat, dense_grads) = dense_backward(&trace.flat, &self.dense, grad_logits)?;
        let g_d2 = g_flat.reshape(trace.tanh2_out.shape())?;
        let g_t2 = dropout_backward(&g_d2, &trace.drop2_mask, rate);
        let g_p2 = tanh_backward(&trace.tanh2_out, &g_t2);
        let g_y2 = maxpool_backward(&trace.pool2, &g_p2)?;
        let (g_d1, layer2_grads) = Self::op_backward(&self.layer2, &trace.l2, kernel, &g_y2)?;

        let g_t1 = dropout_backward(&g_d1, &trace.drop1_mask, rate);
        let g_p1 = tanh_backward(&trace.tanh1_out, &g_t1);
        let g_y1 = maxpool_backward(&trace.pool1, &g_p1)?;
        let (_, layer1_grads) = Self::op_backward(&self.layer1, &trace.l1, kernel, &g_y1)?;

        Ok(ModelGrads {
            layer1: layer1_grads,
            layer2: layer2_grads,
            dense: dense_grads,
        })
    }
}

impl ModelGrads {
    /// Zero gradients matching a model's parameter structure.
    pub fn zeros_for(model: &Model) -> Self {
        let op_zero = |l: &OpLayer| match l {
            OpLayer::Conv(p) => OpGrads::Conv(p.zero_grads()),
            OpLayer::Onn(p) => OpGrads::Onn(p.zero_grads()),
        };
        ModelGrads {
            layer1: op_zero(&model.layer1),
            layer2: op_zero(&model.layer2),
            dense: model.dense.zero_grads(),
        }
    }

    /// Gradient tensors in the same canonical order as
    /// [`Model::named_params`].
    pub fn tensors(&self) -> Vec<&Tensor<f32>> {
        let mut out: Vec<&Tensor<f32>> = Vec::new();
        for g in [&self.layer1, &self.layer2] {
            match g {
                OpGrads::Conv(g) => {
                    out.push(&g.weights);
                    out.push(&g.bias);
                }
                OpGrads::Onn(g) => {
                    out.push(&g.linear_weights);
                    out.push(&g.quad_blocks);
                    out.push(&g.bias);
                }
            }
        }
        out.push(&self.dense.weights);
        out.push(&self.dense.bias);
        out
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor<f32>> {
        let mut out: Vec<&mut Tensor<f32>> = Vec::new();
        for g in [&mut self.layer1, &mut self.layer2] {
            match g {
                OpGrads::Conv(g) => {
                    out.push(&mut g.weights);
                    out.push(&mut g.bias);
                }
                OpGrads::Onn(g) => {
                    out.push(&mut g.linear_weights);
                    out.push(&mut g.quad_blocks);
                    out.push(&mut g.bias);
                }
            }
        }
        out.push(&mut self.dense.weights);
        out.push(&mut self.dense.bias);
        out
    }

    /// `self += other`, for accumulating per-example gradients over a batch.
    pub fn accumulate(&mut self, other: &ModelGrads) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a.add_assign(b);
        }
    }

    /// Scale every gradient, used for batch averaging.
    pub fn scale(&mut self, factor: f32) {
        for t in self.tensors_mut() {
            t.scale(factor);
        }
    }
}
