//! Element-wise powers, block-diagonal quadratic forms, and the small dense
//! matrix helpers shared by every layer.

use crate::error::{Error, Result};
use crate::tensor::{Element, Tensor};

/// Raise every element to the positive integer power `q`.
///
/// `q = 1` returns an exact copy, which the layer reduction identities rely
/// on.
pub fn elementwise_power<E: Element>(x: &Tensor<E>, q: u32) -> Tensor<E> {
    assert!(q >= 1, "power must be a positive integer");
    if q == 1 {
        return x.clone();
    }
    let mut out = x.clone();
    for v in out.data_mut() {
        let base = *v;
        let mut acc = base;
        for _ in 1..q {
            acc *= base;
        }
        *v = acc;
    }
    out
}

/// `sum_c p_c^T blocks[c] p_c` where `p` is one vectorized patch row of
/// length `C_in * n` and each block is an `n x n` matrix acting on the
/// `c`-th channel slice of the patch.
pub fn blockdiag_quadratic_form<E: Element>(p: &Tensor<E>, blocks: &[Tensor<E>]) -> Result<E> {
    if blocks.is_empty() {
        return Err(Error::Shape(
            "quadratic form needs at least one block".into(),
        ));
    }
    let n = blocks[0].shape().first().copied().unwrap_or(0);
    for b in blocks {
        if b.shape() != [n, n] {
            return Err(Error::Shape(format!(
                "quadratic block must be {n}x{n}, got {:?}",
                b.shape()
            )));
        }
    }
    if p.numel() != blocks.len() * n {
        return Err(Error::Shape(format!(
            "patch of length {} does not split into {} blocks of size {n}",
            p.numel(),
            blocks.len()
        )));
    }
    let mut acc = E::ZERO;
    for (c, block) in blocks.iter().enumerate() {
        let slice = &p.data()[c * n..(c + 1) * n];
        acc += quadratic_form_block(slice, block.data(), n);
    }
    Ok(acc)
}

/// `p^T B p` for one `n x n` block given as a row-major slice.
#[inline]
pub fn quadratic_form_block<E: Element>(p: &[E], block: &[E], n: usize) -> E {
    debug_assert_eq!(p.len(), n);
    debug_assert_eq!(block.len(), n * n);
    let mut acc = E::ZERO;
    for (i, &pi) in p.iter().enumerate() {
        let row = &block[i * n..(i + 1) * n];
        let mut dot = E::ZERO;
        for (&b, &pj) in row.iter().zip(p) {
            dot += b * pj;
        }
        acc += pi * dot;
    }
    acc
}

/// Row-major `a (ar x ac) * b (ac x bc)`, accumulated into a fresh buffer.
pub fn matmul<E: Element>(a: &[E], ar: usize, ac: usize, b: &[E], bc: usize) -> Vec<E> {
    debug_assert_eq!(a.len(), ar * ac);
    debug_assert_eq!(b.len(), ac * bc);
    let mut out = vec![E::ZERO; ar * bc];
    for i in 0..ar {
        let arow = &a[i * ac..(i + 1) * ac];
        let orow = &mut out[i * bc..(i + 1) * bc];
        for (k, &av) in arow.iter().enumerate() {
            let brow = &b[k * bc..(k + 1) * bc];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
    out
}

/// Transpose a row-major `rows x cols` matrix.
pub fn transpose<E: Element>(m: &[E], rows: usize, cols: usize) -> Vec<E> {
    debug_assert_eq!(m.len(), rows * cols);
    let mut out = vec![E::ZERO; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = m[r * cols + c];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn even_power_symmetry() {
        let x = Tensor::from_vec(&[2], vec![0.5f32, -0.5]);
        let y = elementwise_power(&x, 2);
        assert_eq!(y.data(), &[0.25, 0.25]);
    }

    #[test]
    fn first_power_is_identity() {
        let x = Tensor::from_vec(&[3], vec![0.1f32, -0.7, 0.3]);
        assert!(elementwise_power(&x, 1).bit_eq(&x));
    }

    #[test]
    fn odd_power_fixed_points() {
        let x = Tensor::from_vec(&[3], vec![-1.0f32, 0.0, 1.0]);
        let y = elementwise_power(&x, 3);
        assert_eq!(y.data(), &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn scalar_quadratic_form() {
        // n = 1, C_in = 1: omega * x^2 with x = 2, omega = 0.5.
        let p = Tensor::from_vec(&[1], vec![2.0f64]);
        let blocks = [Tensor::from_vec(&[1, 1], vec![0.5f64])];
        assert_eq!(blockdiag_quadratic_form(&p, &blocks).unwrap(), 2.0);
    }

    #[test]
    fn zero_blocks_vanish() {
        let p = Tensor::from_vec(&[8], vec![0.3f64; 8]);
        let blocks = [Tensor::zeros(&[4, 4]), Tensor::zeros(&[4, 4])];
        assert_eq!(blockdiag_quadratic_form(&p, &blocks).unwrap(), 0.0);
    }

    #[test]
    fn identity_block_sums_squares() {
        let p = Tensor::from_vec(&[4], vec![1.0f64; 4]);
        let mut eye = Tensor::zeros(&[4, 4]);
        for i in 0..4 {
            eye.set(&[i, i], 1.0);
        }
        assert_eq!(blockdiag_quadratic_form(&p, &[eye]).unwrap(), 4.0);
    }

    #[test]
    fn mismatched_block_size_is_rejected() {
        let p = Tensor::from_vec(&[4], vec![1.0f64; 4]);
        let blocks = [Tensor::zeros(&[3, 3])];
        assert!(matches!(
            blockdiag_quadratic_form(&p, &blocks),
            Err(Error::Shape(_))
        ));
    }

    /// Folding a full block into an upper-triangular one by U_ii = M_ii,
    /// U_ij = M_ij + M_ji (i < j) preserves the quadratic form.
    #[test]
    fn upper_triangular_folding_preserves_form() {
        let mut rng = SplitMix64::new(31);
        for _ in 0..50 {
            let n = 1 + rng.below(5);
            let m: Vec<f64> = (0..n * n).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let mut u = vec![0.0f64; n * n];
            for i in 0..n {
                u[i * n + i] = m[i * n + i];
                for j in (i + 1)..n {
                    u[i * n + j] = m[i * n + j] + m[j * n + i];
                }
            }
            let p: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let full = quadratic_form_block(&p, &m, n);
            let tri = quadratic_form_block(&p, &u, n);
            assert!((full - tri).abs() < 1e-6, "{full} vs {tri}");
        }
    }

    #[test]
    fn matmul_against_hand_case() {
        // [1 2; 3 4] * [5 6; 7 8] = [19 22; 43 50]
        let a = [1.0f64, 2.0, 3.0, 4.0];
        let b = [5.0f64, 6.0, 7.0, 8.0];
        assert_eq!(matmul(&a, 2, 2, &b, 2), vec![19.0, 22.0, 43.0, 50.0]);
    }

    #[test]
    fn transpose_round_trip() {
        let m: Vec<f32> = (0..12).map(|v| v as f32).collect();
        let t = transpose(&m, 3, 4);
        let back = transpose(&t, 4, 3);
        assert_eq!(m, back);
    }
}
