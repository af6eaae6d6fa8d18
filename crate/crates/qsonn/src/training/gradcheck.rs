//! Finite-difference verification of the hand-derived layer gradients.
//!
//! Each check builds a small random layer in 64-bit precision, compares
//! every analytic gradient coordinate (parameters and input) against central
//! differences with step 1e-5, and reports the worst relative error. Sound
//! gradients land around 1e-9; anything near the 1e-4 acceptance threshold
//! means a broken derivative.

use crate::layers::{
    conv2d_backward, conv2d_forward, qselfonn_backward, qselfonn_forward, ConvParams,
    QSelfOnnParams, QuadMode,
};
use crate::model::LayerKind;
use crate::rng::{combine, SplitMix64};
use crate::tensor::{KernelSpec, Tensor};

const STEP: f64 = 1e-5;

/// Result of one gradient check configuration.
#[derive(Debug, Clone)]
pub struct GradCheckCase {
    pub layer_kind: LayerKind,
    pub q_max: usize,
    pub quad_mode: QuadMode,
    pub worst_rel_err: f64,
}

impl GradCheckCase {
    pub fn label(&self) -> String {
        match self.layer_kind {
            LayerKind::Conv => "conv".to_string(),
            LayerKind::SelfOnn => format!("selfonn Q={}", self.q_max),
            LayerKind::QSelfOnn => {
                let mode = match self.quad_mode {
                    QuadMode::UpperTriangular => "upper-triangular",
                    QuadMode::FullBlock => "full-block",
                    QuadMode::Off => "off",
                };
                format!("qselfonn {mode} Q={}", self.q_max)
            }
        }
    }
}

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / f64::max(1e-4, a.abs().max(n.abs()))
}

fn fill(rng: &mut SplitMix64, t: &mut Tensor<f64>, bound: f64) {
    for v in t.data_mut() {
        *v = rng.uniform(-bound, bound);
    }
}

/// Worst relative error between analytic and central-difference gradients
/// for one layer configuration. Geometry: C_in=2, C_out=3, 6x6 input, 3x3
/// kernel with padding 1. In upper-triangular mode the strictly-lower block
/// entries are pinned (not parameters); their analytic gradients must be
/// exactly zero and any violation is reported as an error of 1.0.
pub fn grad_check(layer_kind: LayerKind, q_max: usize, quad_mode: QuadMode, seed: u64) -> f64 {
    let spec = KernelSpec::new(3, 3, 1, 1, 1).expect("static kernel spec");
    let mut rng = SplitMix64::new(combine(&[seed, q_max as u64, quad_mode as u64]));
    let (c_in, c_out) = (2usize, 3usize);

    let mut x = Tensor::<f64>::zeros(&[c_in, 6, 6]);
    fill(&mut rng, &mut x, 0.9);

    match layer_kind {
        LayerKind::Conv => {
            let mut p = ConvParams::<f64>::zeros(c_out, c_in, &spec);
            fill(&mut rng, &mut p.weights, 0.7);
            fill(&mut rng, &mut p.bias, 0.3);
            let y = conv2d_forward(&x, &p, &spec).expect("forward");
            let mut grad_out = y.zeros_like();
            fill(&mut rng, &mut grad_out, 1.0);
            let (gx, grads) = conv2d_backward(&x, &p, &spec, &grad_out).expect("backward");

            let loss = |x: &Tensor<f64>, p: &ConvParams<f64>| -> f64 {
                let y = conv2d_forward(x, p, &spec).expect("forward");
                y.data()
                    .iter()
                    .zip(grad_out.data())
                    .map(|(a, b)| a * b)
                    .sum()
            };
            let mut worst = 0.0f64;
            for i in 0..p.weights.numel() {
                let mut plus = p.clone();
                plus.weights.data_mut()[i] += STEP;
                let mut minus = p.clone();
                minus.weights.data_mut()[i] -= STEP;
                let fd = (loss(&x, &plus) - loss(&x, &minus)) / (2.0 * STEP);
                worst = worst.max(rel_err(grads.weights.data()[i], fd));
            }
            for i in 0..p.bias.numel() {
                let mut plus = p.clone();
                plus.bias.data_mut()[i] += STEP;
                let mut minus = p.clone();
                minus.bias.data_mut()[i] -= STEP;
                let fd = (loss(&x, &plus) - loss(&x, &minus)) / (2.0 * STEP);
                worst = worst.max(rel_err(grads.bias.data()[i], fd));
            }
            for i in 0..x.numel() {
                let mut plus = x.clone();
                plus.data_mut()[i] += STEP;
                let mut minus = x.clone();
                minus.data_mut()[i] -= STEP;
                let fd = (loss(&plus, &p) - loss(&minus, &p)) / (2.0 * STEP);
                worst = worst.max(rel_err(gx.data()[i], fd));
            }
            worst
        }
        LayerKind::SelfOnn | LayerKind::QSelfOnn => {
            let mut p = QSelfOnnParams::<f64>::zeros(q_max, c_out, c_in, &spec, quad_mode);
            fill(&mut rng, &mut p.linear_weights, 0.7);
            if quad_mode != QuadMode::Off {
                fill(&mut rng, &mut p.quad_blocks, 0.7);
            }
            fill(&mut rng, &mut p.bias, 0.3);
            p.enforce_mode();

            let y = qselfonn_forward(&x, &p, &spec).expect("forward");
            let mut grad_out = y.zeros_like();
            fill(&mut rng, &mut grad_out, 1.0);
            let (gx, grads) = qselfonn_backward(&x, &p, &spec, &grad_out).expect("backward");

            let loss = |x: &Tensor<f64>, p: &QSelfOnnParams<f64>| -> f64 {
                let y = qselfonn_forward(x, p, &spec).expect("forward");
                y.data()
                    .iter()
                    .zip(grad_out.data())
                    .map(|(a, b)| a * b)
                    .sum()
            };
            let n = spec.receptive_field();
            let mut worst = 0.0f64;
            for i in 0..p.linear_weights.numel() {
                let mut plus = p.clone();
                plus.linear_weights.data_mut()[i] += STEP;
                let mut minus = p.clone();
                minus.linear_weights.data_mut()[i] -= STEP;
                let fd = (loss(&x, &plus) - loss(&x, &minus)) / (2.0 * STEP);
                worst = worst.max(rel_err(grads.linear_weights.data()[i], fd));
            }
            if quad_mode != QuadMode::Off {
                for i in 0..p.quad_blocks.numel() {
                    let within = i % (n * n);
                    let strictly_lower = (within / n) > (within % n);
                    if quad_mode == QuadMode::UpperTriangular && strictly_lower {
                        // pinned entry: not a parameter, gradient must be zero
                        if grads.quad_blocks.data()[i] != 0.0 {
                            worst = worst.max(1.0);
                        }
                        continue;
                    }
                    let mut plus = p.clone();
                    plus.quad_blocks.data_mut()[i] += STEP;
                    let mut minus = p.clone();
                    minus.quad_blocks.data_mut()[i] -= STEP;
                    let fd = (loss(&x, &plus) - loss(&x, &minus)) / (2.0 * STEP);
                    worst = worst.max(rel_err(grads.quad_blocks.data()[i], fd));
                }
            }
            for i in 0..p.bias.numel() {
                let mut plus = p.clone();
                plus.bias.data_mut()[i] += STEP;
                let mut minus = p.clone();
                minus.bias.data_mut()[i] -= STEP;
                let fd = (loss(&x, &plus) - loss(&x, &minus)) / (2.0 * STEP);
                worst = worst.max(rel_err(grads.bias.data()[i], fd));
            }
            for i in 0..x.numel() {
                let mut plus = x.clone();
                plus.data_mut()[i] += STEP;
                let mut minus = x.clone();
                minus.data_mut()[i] -= STEP;
                let fd = (loss(&plus, &p) - loss(&minus, &p)) / (2.0 * STEP);
                worst = worst.max(rel_err(gx.data()[i], fd));
            }
            worst
        }
    }
}

/// Every valid layer kind / quad mode / Q combination up to `q_limit`.
pub fn grad_check_suite(q_limit: usize, seed: u64) -> Vec<GradCheckCase> {
    let mut cases = Vec::new();
    cases.push(GradCheckCase {
        layer_kind: LayerKind::Conv,
        q_max: 1,
        quad_mode: QuadMode::Off,
        worst_rel_err: grad_check(LayerKind::Conv, 1, QuadMode::Off, seed),
    });
    for q in 1..=q_limit {
        cases.push(GradCheckCase {
            layer_kind: LayerKind::SelfOnn,
            q_max: q,
            quad_mode: QuadMode::Off,
            worst_rel_err: grad_check(LayerKind::SelfOnn, q, QuadMode::Off, seed),
        });
    }
    for mode in [QuadMode::UpperTriangular, QuadMode::FullBlock] {
        for q in 1..=q_limit {
            cases.push(GradCheckCase {
                layer_kind: LayerKind::QSelfOnn,
                q_max: q,
                quad_mode: mode,
                worst_rel_err: grad_check(LayerKind::QSelfOnn, q, mode, seed),
            });
        }
    }
    cases
}
