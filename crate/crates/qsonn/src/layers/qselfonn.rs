//! The self-organized operational layer and its quadratic extension.
//!
//! A neuron here generalizes the convolutional dot product in two steps.
//! First the receptive field is expanded element-wise into powers
//! `x, x^2, ..., x^Q`, each with its own weight vector, so the nodal
//! function is learned as a truncated power series. Second, every power can
//! additionally pass through a learnable block-diagonal quadratic form (one
//! `n x n` block per input channel, `n` the receptive-field size), which
//! models cross-correlations between taps inside the window:
//!
//! `y = sum_q (x^q)^T Omega_q x^q + sum_q w_q^T x^q + b`
//!
//! With the quadratic term disabled this is the plain power-series layer;
//! with `Q = 1` as well it collapses to an ordinary convolution. Both
//! reductions are bit-exact because the degenerate cases run the identical
//! instruction sequence.

use crate::error::{Error, Result};
use crate::tensor::{
    extract_patches, matmul, quadratic_form_block, scatter_patches, transpose, Element, KernelSpec,
    Tensor,
};

/// Structure of the quadratic term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadMode {
    /// No quadratic term: the layer is a pure power-series (SelfONN) layer.
    Off,
    /// Volterra-style upper-triangular blocks; strictly-lower entries are
    /// pinned to zero and never updated.
    UpperTriangular,
    /// Every entry of every diagonal block is learnable.
    FullBlock,
}

/// Learnable state of one operational layer.
#[derive(Debug, Clone)]
pub struct QSelfOnnParams<E: Element = f32> {
    /// Power-series truncation order Q.
    pub q_max: usize,
    pub quad_mode: QuadMode,
    /// `[Q, C_out, C_in, kh, kw]`; the trailing three dims vectorize in the
    /// same channel-major order as extracted patches.
    pub linear_weights: Tensor<E>,
    /// `[Q, C_out, C_in, n, n]` with `n = kh * kw`.
    pub quad_blocks: Tensor<E>,
    /// `[C_out]`.
    pub bias: Tensor<E>,
}

/// Gradients of a [`QSelfOnnParams`], same shapes as the parameters.
#[derive(Debug, Clone)]
pub struct QSelfOnnGrads<E: Element = f32> {
    pub linear_weights: Tensor<E>,
    pub quad_blocks: Tensor<E>,
    pub bias: Tensor<E>,
}

impl<E: Element> QSelfOnnParams<E> {
    /// All-zero parameters of the given geometry.
    pub fn zeros(
        q_max: usize,
        c_out: usize,
        c_in: usize,
        spec: &KernelSpec,
        quad_mode: QuadMode,
    ) -> Self {
        let n = spec.receptive_field();
        QSelfOnnParams {
            q_max,
            quad_mode,
            linear_weights: Tensor::zeros(&[q_max, c_out, c_in, spec.kernel_h, spec.kernel_w]),
            quad_blocks: Tensor::zeros(&[q_max, c_out, c_in, n, n]),
            bias: Tensor::zeros(&[c_out]),
        }
    }

    pub fn c_out(&self) -> usize {
        self.linear_weights.shape()[1]
    }

    pub fn c_in(&self) -> usize {
        self.linear_weights.shape()[2]
    }

    fn receptive_field(&self) -> usize {
        self.linear_weights.shape()[3] * self.linear_weights.shape()[4]
    }

    /// Check shape consistency and the structural invariants of the mode:
    /// `Off` requires all-zero blocks, `UpperTriangular` requires zero
    /// strictly-lower entries.
    pub fn validate(&self, spec: &KernelSpec) -> Result<()> {
        if self.q_max == 0 {
            return Err(Error::Config("q_max must be >= 1".into()));
        }
        let lw = self.linear_weights.shape();
        if lw.len() != 5 || lw[0] != self.q_max || lw[3] != spec.kernel_h || lw[4] != spec.kernel_w
        {
            return Err(Error::Shape(format!(
                "linear weights {lw:?} inconsistent with Q={} and kernel {}x{}",
                self.q_max, spec.kernel_h, spec.kernel_w
            )));
        }
        let n = spec.receptive_field();
        let qb = self.quad_blocks.shape();
        if qb != [self.q_max, lw[1], lw[2], n, n] {
            return Err(Error::Shape(format!(
                "quadratic blocks {qb:?} inconsistent with weights {lw:?}"
            )));
        }
        if self.bias.shape() != [lw[1]] {
            return Err(Error::Shape(format!(
                "bias {:?} inconsistent with C_out={}",
                self.bias.shape(),
                lw[1]
            )));
        }
        match self.quad_mode {
            QuadMode::Off => {
                if self.quad_blocks.data().iter().any(|&v| v != E::ZERO) {
                    return Err(Error::Config(
                        "quad_mode Off requires all-zero quadratic blocks".into(),
                    ));
                }
            }
            QuadMode::UpperTriangular => {
                let blocks = self.quad_blocks.data();
                for (b, chunk) in blocks.chunks_exact(n * n).enumerate() {
                    for i in 0..n {
                        for j in 0..i {
                            if chunk[i * n + j] != E::ZERO {
                                return Err(Error::Config(format!(
                                    "upper-triangular block {b} has nonzero entry below the diagonal at ({i},{j})"
                                )));
                            }
                        }
                    }
                }
            }
            QuadMode::FullBlock => {}
        }
        Ok(())
    }

    /// Zero the entries the mode declares non-learnable (all blocks for
    /// `Off`, strictly-lower triangles for `UpperTriangular`).
    pub fn enforce_mode(&mut self) {
        let n = self.receptive_field();
        match self.quad_mode {
            QuadMode::Off => {
                for v in self.quad_blocks.data_mut() {
                    *v = E::ZERO;
                }
            }
            QuadMode::UpperTriangular => {
                for chunk in self.quad_blocks.data_mut().chunks_exact_mut(n * n) {
                    for i in 0..n {
                        for j in 0..i {
                            chunk[i * n + j] = E::ZERO;
                        }
                    }
                }
            }
            QuadMode::FullBlock => {}
        }
    }

    pub fn zero_grads(&self) -> QSelfOnnGrads<E> {
        QSelfOnnGrads {
            linear_weights: self.linear_weights.zeros_like(),
            quad_blocks: self.quad_blocks.zeros_like(),
            bias: self.bias.zeros_like(),
        }
    }

    /// Learnable parameter count: per-power weight vectors, the learnable
    /// part of each block (none / upper triangle / full), and biases.
    pub fn param_count(&self) -> usize {
        let n = self.receptive_field();
        let linear = self.linear_weights.numel();
        let per_block = match self.quad_mode {
            QuadMode::Off => 0,
            QuadMode::UpperTriangular => n * (n + 1) / 2,
            QuadMode::FullBlock => n * n,
        };
        linear + self.q_max * self.c_out() * self.c_in() * per_block + self.bias.numel()
    }
}

/// Intermediate state kept from a forward pass for the backward pass.
pub struct QSelfOnnCache<E: Element> {
    /// `patches_pow[q-1]` is the patch matrix raised element-wise to `q`.
    patches_pow: Vec<Tensor<E>>,
    input_shape: [usize; 3],
    out_hw: (usize, usize),
}

fn check_input<E: Element>(
    x: &Tensor<E>,
    p: &QSelfOnnParams<E>,
    spec: &KernelSpec,
) -> Result<[usize; 3]> {
    let shape: [usize; 3] = x.shape().try_into().map_err(|_| {
        Error::Shape(format!(
            "expected a 3-D [C, H, W] input, got {:?}",
            x.shape()
        ))
    })?;
    if shape[0] != p.c_in() {
        return Err(Error::Shape(format!(
            "input has {} channels but the layer expects {}",
            shape[0],
            p.c_in()
        )));
    }
    p.validate(spec)?;
    Ok(shape)
}

/// Forward pass keeping the per-power patch matrices for backprop.
pub fn qselfonn_forward_cached<E: Element>(
    x: &Tensor<E>,
    p: &QSelfOnnParams<E>,
    spec: &KernelSpec,
) -> Result<(Tensor<E>, QSelfOnnCache<E>)> {
    let input_shape = check_input(x, p, spec)?;
    let (out_h, out_w) = spec.output_size(input_shape[1], input_shape[2])?;
    let positions = out_h * out_w;
    let c_out = p.c_out();
    let c_in = p.c_in();
    let n = spec.receptive_field();
    let row_len = c_in * n;

    let patches = extract_patches(x, spec)?;
    let mut patches_pow = Vec::with_capacity(p.q_max);
    patches_pow.push(patches);
    for _ in 1..p.q_max {
        let next = {
            let prev = patches_pow.last().unwrap();
            let base = &patches_pow[0];
            let mut next = prev.clone();
            for (v, &b) in next.data_mut().iter_mut().zip(base.data()) {
                *v *= b;
            }
            next
        };
        patches_pow.push(next);
    }

    // linear term, accumulated power by power
    let weights = p.linear_weights.data();
    let w_t = |q: usize| {
        transpose(
            &weights[q * c_out * row_len..(q + 1) * c_out * row_len],
            c_out,
            row_len,
        )
    };
    let mut out_mat = matmul(patches_pow[0].data(), positions, row_len, &w_t(0), c_out);
    for (q, powered) in patches_pow.iter().enumerate().skip(1) {
        let term = matmul(powered.data(), positions, row_len, &w_t(q), c_out);
        for (o, t) in out_mat.iter_mut().zip(term) {
            *o += t;
        }
    }

    // quadratic term
    if p.quad_mode != QuadMode::Off {
        let blocks = p.quad_blocks.data();
        for q in 0..p.q_max {
            let xq = patches_pow[q].data();
            for co in 0..c_out {
                for c in 0..c_in {
                    let block = &blocks[(((q * c_out) + co) * c_in + c) * n * n..][..n * n];
                    for pos in 0..positions {
                        let slice = &xq[pos * row_len + c * n..][..n];
                        out_mat[pos * c_out + co] += quadratic_form_block(slice, block, n);
                    }
                }
            }
        }
    }

    let bias = p.bias.data();
    for pos in 0..positions {
        for co in 0..c_out {
            out_mat[pos * c_out + co] += bias[co];
        }
    }

    let out = Tensor::from_vec(
        &[c_out, out_h, out_w],
        transpose(&out_mat, positions, c_out),
    );
    Ok((
        out,
        QSelfOnnCache {
            patches_pow,
            input_shape,
            out_hw: (out_h, out_w),
        },
    ))
}

/// `y(i,j) = sum_q (x^q)^T Omega_q x^q + sum_q w_q^T x^q + b` at every
/// output position.
pub fn qselfonn_forward<E: Element>(
    x: &Tensor<E>,
    p: &QSelfOnnParams<E>,
    spec: &KernelSpec,
) -> Result<Tensor<E>> {
    qselfonn_forward_cached(x, p, spec).map(|(y, _)| y)
}

/// Power-series layer: [`qselfonn_forward`] restricted to `quad_mode = Off`.
pub fn selfonn_forward<E: Element>(
    x: &Tensor<E>,
    p: &QSelfOnnParams<E>,
    spec: &KernelSpec,
) -> Result<Tensor<E>> {
    if p.quad_mode != QuadMode::Off {
        return Err(Error::Config(
            "selfonn_forward requires quad_mode Off".into(),
        ));
    }
    qselfonn_forward(x, p, spec)
}

/// Backward pass from cached forward state.
///
/// Derivatives of the layer equation: `dY/dw_q = x^q`, `dY/dOmega_q` is the
/// per-channel outer product of `x^q` with itself, `dY/db = 1`, and `dY/dx`
/// chains the per-element factor `q * x^(q-1)` through
/// `(Omega_q + Omega_q^T) x^q + w_q`. In `UpperTriangular` mode the
/// strictly-lower block gradients are zeroed after accumulation.
pub fn qselfonn_backward_cached<E: Element>(
    cache: &QSelfOnnCache<E>,
    p: &QSelfOnnParams<E>,
    spec: &KernelSpec,
    grad_out: &Tensor<E>,
) -> Result<(Tensor<E>, QSelfOnnGrads<E>)> {
    let c_out = p.c_out();
    let c_in = p.c_in();
    let n = spec.receptive_field();
    let row_len = c_in * n;
    let (out_h, out_w) = cache.out_hw;
    let positions = out_h * out_w;
    if grad_out.shape() != [c_out, out_h, out_w] {
        return Err(Error::Shape(format!(
            "grad_out shape {:?} does not match forward output [{c_out}, {out_h}, {out_w}]",
            grad_out.shape()
        )));
    }

    let g = grad_out.data(); // row-major [C_out, P]
    let mut grads = p.zero_grads();

    for co in 0..c_out {
        let mut acc = E::ZERO;
        for pos in 0..positions {
            acc += g[co * positions + pos];
        }
        grads.bias.data_mut()[co] = acc;
    }

    let g_t = transpose(g, c_out, positions); // [P, C_out]
    let weights = p.linear_weights.data();
    let blocks = p.quad_blocks.data();
    let mut grad_patches = vec![E::ZERO; positions * row_len];

    for q in 0..p.q_max {
        let xq = cache.patches_pow[q].data();

        // dL/dw_q = g . x^q
        let gw = matmul(g, c_out, positions, xq, row_len);
        grads.linear_weights.data_mut()[q * c_out * row_len..(q + 1) * c_out * row_len]
            .copy_from_slice(&gw);

        // dL/dOmega_q: weighted outer products per channel block
        if p.quad_mode != QuadMode::Off {
            let gb = grads.quad_blocks.data_mut();
            for co in 0..c_out {
                for c in 0..c_in {
                    let dst = &mut gb[(((q * c_out) + co) * c_in + c) * n * n..][..n * n];
                    for pos in 0..positions {
                        let gv = g[co * positions + pos];
                        if gv == E::ZERO {
                            continue;
                        }
                        let xs = &xq[pos * row_len + c * n..][..n];
                        for (i, &xi) in xs.iter().enumerate() {
                            let gxi = gv * xi;
                            let row = &mut dst[i * n..(i + 1) * n];
                            for (d, &xj) in row.iter_mut().zip(xs) {
                                *d += gxi * xj;
                            }
                        }
                    }
                }
            }
        }

        // dL/dpatches: linear contribution ...
        let wq = &weights[q * c_out * row_len..(q + 1) * c_out * row_len];
        let mut a = matmul(&g_t, positions, c_out, wq, row_len);

        // ... plus (Omega + Omega^T) x^q weighted by g
        if p.quad_mode != QuadMode::Off {
            let mut sym = vec![E::ZERO; n * n];
            for co in 0..c_out {
                for c in 0..c_in {
                    let block = &blocks[(((q * c_out) + co) * c_in + c) * n * n..][..n * n];
                    for i in 0..n {
                        for j in 0..n {
                            sym[i * n + j] = block[i * n + j] + block[j * n + i];
                        }
                    }
                    for pos in 0..positions {
                        let gv = g[co * positions + pos];
                        if gv == E::ZERO {
                            continue;
                        }
                        let xs = &xq[pos * row_len + c * n..][..n];
                        let arow = &mut a[pos * row_len + c * n..][..n];
                        for i in 0..n {
                            let srow = &sym[i * n..(i + 1) * n];
                            let mut dot = E::ZERO;
                            for (&s, &xj) in srow.iter().zip(xs) {
                                dot += s * xj;
                            }
                            arow[i] += gv * dot;
                        }
                    }
                }
            }
        }

        // chain through the element-wise power: d(x^q)/dx = q * x^(q-1)
        if q == 0 {
            for (gp, av) in grad_patches.iter_mut().zip(&a) {
                *gp += *av;
            }
        } else {
            let factor = E::from_f64((q + 1) as f64);
            let x_prev = cache.patches_pow[q - 1].data();
            for ((gp, av), &xp) in grad_patches.iter_mut().zip(&a).zip(x_prev) {
                *gp += *av * factor * xp;
            }
        }
    }

    if p.quad_mode == QuadMode::UpperTriangular {
        for chunk in grads.quad_blocks.data_mut().chunks_exact_mut(n * n) {
            for i in 0..n {
                for j in 0..i {
                    chunk[i * n + j] = E::ZERO;
                }
            }
        }
    }

    let grad_patches = Tensor::from_vec(&[positions, row_len], grad_patches);
    let grad_x = scatter_patches(&grad_patches, &cache.input_shape, spec)?;
    Ok((grad_x, grads))
}

/// Backward pass recomputing the forward cache from `x`.
pub fn qselfonn_backward<E: Element>(
    x: &Tensor<E>,
    p: &QSelfOnnParams<E>,
    spec: &KernelSpec,
    grad_out: &Tensor<E>,
) -> Result<(Tensor<E>, QSelfOnnGrads<E>)> {
    let (_, cache) = qselfonn_forward_cached(x, p, spec)?;
    qselfonn_backward_cached(&cache, p, spec, grad_out)
}

/// Fold full blocks into upper-triangular ones preserving the quadratic
/// form: `U_ii = M_ii`, `U_ij = M_ij + M_ji` for `i < j`.
pub fn fold_to_upper_triangular<E: Element>(
    p: &QSelfOnnParams<E>,
    spec: &KernelSpec,
) -> QSelfOnnParams<E> {
    let n = spec.receptive_field();
    let mut folded = p.clone();
    folded.quad_mode = QuadMode::UpperTriangular;
    for chunk in folded.quad_blocks.data_mut().chunks_exact_mut(n * n) {
        for i in 0..n {
            for j in 0..i {
                chunk[j * n + i] += chunk[i * n + j];
                chunk[i * n + j] = E::ZERO;
            }
        }
    }
    folded
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::tensor::elementwise_power;

    fn random_params(
        rng: &mut SplitMix64,
        q_max: usize,
        c_out: usize,
        c_in: usize,
        spec: &KernelSpec,
        quad_mode: QuadMode,
    ) -> QSelfOnnParams<f64> {
        let mut p = QSelfOnnParams::zeros(q_max, c_out, c_in, spec, quad_mode);
        for v in p.linear_weights.data_mut() {
            *v = rng.uniform(-0.7, 0.7);
        }
        if quad_mode != QuadMode::Off {
            for v in p.quad_blocks.data_mut() {
                *v = rng.uniform(-0.7, 0.7);
            }
        }
        for v in p.bias.data_mut() {
            *v = rng.uniform(-0.3, 0.3);
        }
        p.enforce_mode();
        p
    }

    fn random_input(rng: &mut SplitMix64, shape: &[usize]) -> Tensor<f64> {
        Tensor::from_vec(
            shape,
            (0..shape.iter().product())
                .map(|_| rng.uniform(-0.9, 0.9))
                .collect(),
        )
    }

    #[test]
    fn scalar_forward_case() {
        // 1x1 kernel, C_in = 1, Q = 1: omega 0.5, w 1, b 0.25, x 2
        let spec = KernelSpec::new(1, 1, 1, 1, 0).unwrap();
        let mut p = QSelfOnnParams::<f64>::zeros(1, 1, 1, &spec, QuadMode::FullBlock);
        p.quad_blocks.data_mut()[0] = 0.5;
        p.linear_weights.data_mut()[0] = 1.0;
        p.bias.data_mut()[0] = 0.25;
        let x = Tensor::from_vec(&[1, 2, 2], vec![2.0; 4]);
        let y = qselfonn_forward(&x, &p, &spec).unwrap();
        assert_eq!(y.shape(), &[1, 2, 2]);
        for &v in y.data() {
            assert!((v - 4.25).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_backward_case() {
        let spec = KernelSpec::new(1, 1, 1, 1, 0).unwrap();
        let mut p = QSelfOnnParams::<f64>::zeros(1, 1, 1, &spec, QuadMode::FullBlock);
        p.quad_blocks.data_mut()[0] = 0.5;
        p.linear_weights.data_mut()[0] = 1.0;
        p.bias.data_mut()[0] = 0.25;
        let x = Tensor::from_vec(&[1, 1, 1], vec![2.0]);
        let g = Tensor::from_vec(&[1, 1, 1], vec![1.0]);
        let (gx, grads) = qselfonn_backward(&x, &p, &spec, &g).unwrap();
        assert_eq!(grads.quad_blocks.data()[0], 4.0); // x^2
        assert_eq!(grads.linear_weights.data()[0], 2.0); // x
        assert_eq!(grads.bias.data()[0], 1.0);
        assert_eq!(gx.data()[0], 3.0); // 2*omega*x + w
    }

    #[test]
    fn zero_grad_out_gives_zero_grads() {
        let mut rng = SplitMix64::new(2);
        let spec = KernelSpec::new(3, 3, 1, 1, 1).unwrap();
        let p = random_params(&mut rng, 3, 2, 2, &spec, QuadMode::FullBlock);
        let x = random_input(&mut rng, &[2, 5, 5]);
        let g = Tensor::zeros(&[2, 5, 5]);
        let (gx, grads) = qselfonn_backward(&x, &p, &spec, &g).unwrap();
        assert!(gx.data().iter().all(|&v| v == 0.0));
        assert!(grads.linear_weights.data().iter().all(|&v| v == 0.0));
        assert!(grads.quad_blocks.data().iter().all(|&v| v == 0.0));
        assert!(grads.bias.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_input_outputs_bias() {
        let mut rng = SplitMix64::new(3);
        let spec = KernelSpec::new(3, 3, 1, 1, 1).unwrap();
        let p = random_params(&mut rng, 2, 3, 1, &spec, QuadMode::Off);
        let x = Tensor::zeros(&[1, 4, 4]);
        let y = selfonn_forward(&x, &p, &spec).unwrap();
        for co in 0..3 {
            for pos in 0..16 {
                assert_eq!(y.data()[co * 16 + pos], p.bias.data()[co]);
            }
        }
    }

    #[test]
    fn selfonn_requires_off_mode() {
        let spec = KernelSpec::new(3, 3, 1, 1, 1).unwrap();
        let p = QSelfOnnParams::<f64>::zeros(2, 2, 1, &spec, QuadMode::FullBlock);
        let x = Tensor::zeros(&[1, 4, 4]);
        assert!(matches!(
            selfonn_forward(&x, &p, &spec),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn upper_triangular_invariant_is_enforced() {
        let spec = KernelSpec::new(2, 2, 1, 1, 0).unwrap();
        let mut p = QSelfOnnParams::<f64>::zeros(1, 1, 1, &spec, QuadMode::UpperTriangular);
        p.quad_blocks.data_mut()[4] = 0.3; // entry (1,0): strictly lower
        assert!(p.validate(&spec).is_err());
        p.enforce_mode();
        p.validate(&spec).unwrap();
    }

    #[test]
    fn triangular_folding_matches_full_forward() {
        let mut rng = SplitMix64::new(7);
        let spec = KernelSpec::new(3, 3, 1, 1, 1).unwrap();
        for q_max in [1, 2, 3] {
            let full = random_params(&mut rng, q_max, 3, 2, &spec, QuadMode::FullBlock);
            let tri = fold_to_upper_triangular(&full, &spec);
            tri.validate(&spec).unwrap();
            let x = random_input(&mut rng, &[2, 6, 6]);
            let yf = qselfonn_forward(&x, &full, &spec).unwrap();
            let yt = qselfonn_forward(&x, &tri, &spec).unwrap();
            assert!(
                yf.max_abs_diff(&yt) < 1e-6,
                "Q={q_max}: {}",
                yf.max_abs_diff(&yt)
            );
        }
    }

    #[test]
    fn upper_triangular_grads_stay_upper_triangular() {
        let mut rng = SplitMix64::new(9);
        let spec = KernelSpec::new(3, 3, 1, 1, 1).unwrap();
        let p = random_params(&mut rng, 2, 2, 2, &spec, QuadMode::UpperTriangular);
        let x = random_input(&mut rng, &[2, 5, 5]);
        let g = random_input(&mut rng, &[2, 5, 5]);
        let (_, grads) = qselfonn_backward(&x, &p, &spec, &g).unwrap();
        let n = spec.receptive_field();
        for chunk in grads.quad_blocks.data().chunks_exact(n * n) {
            for i in 0..n {
                for j in 0..i {
                    assert_eq!(chunk[i * n + j], 0.0);
                }
            }
        }
        // and the upper part is not trivially zero
        assert!(grads.quad_blocks.data().iter().any(|&v| v != 0.0));
    }

    #[test]
    fn param_count_by_mode() {
        let spec = KernelSpec::new(3, 3, 1, 1, 1).unwrap();
        let full = QSelfOnnParams::<f32>::zeros(2, 4, 3, &spec, QuadMode::FullBlock);
        assert_eq!(full.param_count(), 2 * 4 * 3 * 9 + 2 * 4 * 3 * 81 + 4);
        let tri = QSelfOnnParams::<f32>::zeros(2, 4, 3, &spec, QuadMode::UpperTriangular);
        assert_eq!(tri.param_count(), 2 * 4 * 3 * 9 + 2 * 4 * 3 * 45 + 4);
        let off = QSelfOnnParams::<f32>::zeros(2, 4, 3, &spec, QuadMode::Off);
        assert_eq!(off.param_count(), 2 * 4 * 3 * 9 + 4);
    }

    #[test]
    fn powers_cache_matches_elementwise_power() {
        let mut rng = SplitMix64::new(13);
        let spec = KernelSpec::new(2, 2, 1, 1, 0).unwrap();
        let p = random_params(&mut rng, 4, 1, 1, &spec, QuadMode::Off);
        let x = random_input(&mut rng, &[1, 3, 3]);
        let (_, cache) = qselfonn_forward_cached(&x, &p, &spec).unwrap();
        let patches = extract_patches(&x, &spec).unwrap();
        for q in 1..=4u32 {
            let expect = elementwise_power(&patches, q);
            assert!(cache.patches_pow[q as usize - 1].max_abs_diff(&expect) < 1e-12);
        }
    }
}
