//! Global intra-sentence attention over augmented hidden states.
//!
//! Every valid position `j` is scored against the last valid state `n`:
//! `u_j = vᵀ tanh(W [h_n; h_j])`, the scores are softmax-normalised over
//! valid positions and the sentence vector is `t = Σ_j α_j h_j`.
//! Invalid (padding) positions get weight exactly zero and never enter the
//! arithmetic.

use super::matrix::{axpy, dot, Matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct AttentionOutput {
    /// Index of the last valid position, used as the query.
    pub query: usize,
    /// `tanh(W [h_n; h_j])` per position; empty for padding.
    pub activations: Vec<Vec<f64>>,
    /// `u_j`; zero for padding.
    pub logits: Vec<f64>,
    /// `α_j`; exactly zero for padding.
    pub weights: Vec<f64>,
    pub sentence: Vec<f64>,
}

/// Splits `W [a; b]` into `W_left a + W_right b`, computing one side.
fn half_gemv(w: &Matrix, x: &[f64], right: bool) -> Vec<f64> {
    let dim = x.len();
    (0..w.rows())
        .map(|r| {
            let row = w.row(r);
            let cols = if right { &row[dim..] } else { &row[..dim] };
            dot(cols, x)
        })
        .collect()
}

pub fn attention(
    augmented: &[Vec<f64>],
    mask: &[bool],
    attn_w: &Matrix,
    attn_v: &[f64],
) -> Result<AttentionOutput> {
    if augmented.len() != mask.len() {
        return Err(Error::Shape(format!(
            "{} states but mask of length {}",
            augmented.len(),
            mask.len()
        )));
    }
    let query = mask
        .iter()
        .rposition(|&m| m)
        .ok_or_else(|| Error::InvalidInput("attention over zero valid positions".into()))?;
    let dim = augmented[query].len();
    if attn_w.cols() != 2 * dim || attn_w.rows() != attn_v.len() {
        return Err(Error::Shape(format!(
            "attention matrix {}x{} / vector {} for state size {dim}",
            attn_w.rows(),
            attn_w.cols(),
            attn_v.len()
        )));
    }

    let q = half_gemv(attn_w, &augmented[query], false);
    let n = augmented.len();
    let mut activations = vec![Vec::new(); n];
    let mut logits = vec![0.0; n];
    for j in (0..n).filter(|&j| mask[j]) {
        let k = half_gemv(attn_w, &augmented[j], true);
        let s: Vec<f64> = q.iter().zip(&k).map(|(a, b)| (a + b).tanh()).collect();
        logits[j] = dot(attn_v, &s);
        activations[j] = s;
    }

    let max = (0..n)
        .filter(|&j| mask[j])
        .map(|j| logits[j])
        .fold(f64::NEG_INFINITY, f64::max);
    let mut weights = vec![0.0; n];
    let mut total = 0.0;
    for j in (0..n).filter(|&j| mask[j]) {
        weights[j] = (logits[j] - max).exp();
        total += weights[j];
    }
    let mut sentence = vec![0.0; dim];
    for j in (0..n).filter(|&j| mask[j]) {
        weights[j] /= total;
        axpy(weights[j], &augmented[j], &mut sentence);
    }
    Ok(AttentionOutput {
        query,
        activations,
        logits,
        weights,
        sentence,
    })
}

/// Accumulates gradients of the attention block given `d_sentence = ∂L/∂t`.
/// `d_augmented` receives the gradient for each state (zero on padding).
#[allow(clippy::too_many_arguments)]
pub fn attention_backward(
    augmented: &[Vec<f64>],
    mask: &[bool],
    attn_w: &Matrix,
    attn_v: &[f64],
    out: &AttentionOutput,
    d_sentence: &[f64],
    grad_w: &mut Matrix,
    grad_v: &mut [f64],
    d_augmented: &mut [Vec<f64>],
) {
    let n = augmented.len();
    let dim = d_sentence.len();
    let valid: Vec<usize> = (0..n).filter(|&j| mask[j]).collect();

    let d_alpha: Vec<f64> = (0..n)
        .map(|j| {
            if mask[j] {
                dot(d_sentence, &augmented[j])
            } else {
                0.0
            }
        })
        .collect();
    let mean: f64 = valid.iter().map(|&j| out.weights[j] * d_alpha[j]).sum();

    let mut concat = vec![0.0; 2 * dim];
    concat[..dim].copy_from_slice(&augmented[out.query]);
    let mut d_concat = vec![0.0; 2 * dim];
    for &j in &valid {
        axpy(out.weights[j], d_sentence, &mut d_augmented[j]);
        let du = out.weights[j] * (d_alpha[j] - mean);
        if du == 0.0 {
            continue;
        }
        let s = &out.activations[j];
        axpy(du, s, grad_v);
        let dz: Vec<f64> = s
            .iter()
            .zip(attn_v)
            .map(|(sk, vk)| du * vk * (1.0 - sk * sk))
            .collect();
        concat[dim..].copy_from_slice(&augmented[j]);
        grad_w.add_outer(&dz, &concat);
        d_concat.fill(0.0);
        attn_w.gemv_t_acc(&dz, &mut d_concat);
        axpy(1.0, &d_concat[..dim], &mut d_augmented[out.query]);
        axpy(1.0, &d_concat[dim..], &mut d_augmented[j]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn states() -> Vec<Vec<f64>> {
        vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, -1.0]]
    }

    #[test]
    fn zero_matrix_gives_uniform_weights() {
        let w = Matrix::zeros(2, 4);
        let out = attention(&states(), &[true; 3], &w, &[0.3, -0.2]).unwrap();
        for &a in &out.weights {
            assert!((a - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((out.sentence[0] - 4.0 / 3.0).abs() < 1e-15);
        assert!((out.sentence[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_valid_position() {
        let w = Matrix::from_vec(2, 4, vec![0.1, 0.2, 0.3, 0.4, -0.1, 0.5, 0.2, 0.0]);
        let out = attention(&states(), &[false, true, false], &w, &[1.0, 1.0]).unwrap();
        assert_eq!(out.weights, vec![0.0, 1.0, 0.0]);
        assert_eq!(out.sentence, vec![0.0, 2.0]);
        assert_eq!(out.query, 1);
    }

    #[test]
    fn no_valid_positions_is_error() {
        let w = Matrix::zeros(2, 4);
        assert!(attention(&states(), &[false; 3], &w, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn shape_mismatch_is_error() {
        let w = Matrix::zeros(2, 6);
        assert!(attention(&states(), &[true; 3], &w, &[0.0, 0.0]).is_err());
        assert!(attention(&states(), &[true; 2], &Matrix::zeros(2, 4), &[0.0, 0.0]).is_err());
    }
}
