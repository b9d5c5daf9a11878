//! Context-windowed (Bi)LSTM with feature-augmented states, intra-sentence
//! attention and a linear regression head.

mod attention;
mod lstm;
mod matrix;
mod network;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FEATURE_DIM;

pub use attention::{attention, attention_backward, AttentionOutput};
pub use lstm::{lstm_backward, lstm_cell, lstm_forward, LstmParams, LstmStep, LstmTrace};
pub use matrix::Matrix;
pub use network::{augment, build_windows, predict, EncodedTweet, ForwardTrace, InputGradients};

/// Sequences are truncated to this many tokens.
pub const DEFAULT_MAX_LEN: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub embed_dim: usize,
    /// Window radius `d`; each position sees `2d + 1` embeddings.
    pub window_radius: usize,
    /// Hidden units per direction.
    pub hidden_size: usize,
    pub bidirectional: bool,
    /// Width of the per-token binary feature vector (9, or 0 to drop features).
    pub feature_dim: usize,
    pub dropout_keep: f64,
    pub max_len: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            embed_dim: 50,
            window_radius: 1,
            hidden_size: 100,
            bidirectional: true,
            feature_dim: FEATURE_DIM,
            dropout_keep: 0.8,
            max_len: DEFAULT_MAX_LEN,
            seed: 42,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 {
            return Err(Error::Config("embed_dim must be positive".into()));
        }
        if self.hidden_size == 0 {
            return Err(Error::Config("hidden_size must be positive".into()));
        }
        if self.feature_dim > FEATURE_DIM {
            return Err(Error::Config(format!(
                "feature_dim {} exceeds the {FEATURE_DIM} available flags",
                self.feature_dim
            )));
        }
        if !(self.dropout_keep > 0.0 && self.dropout_keep <= 1.0) {
            return Err(Error::Config(format!(
                "dropout_keep {} outside (0, 1]",
                self.dropout_keep
            )));
        }
        if self.max_len == 0 {
            return Err(Error::Config("max_len must be positive".into()));
        }
        Ok(())
    }

    pub fn window_size(&self) -> usize {
        2 * self.window_radius + 1
    }

    pub fn window_dim(&self) -> usize {
        self.window_size() * self.embed_dim
    }

    pub fn hidden_dim(&self) -> usize {
        if self.bidirectional {
            2 * self.hidden_size
        } else {
            self.hidden_size
        }
    }

    /// Size of the augmented state, also the attention hidden size.
    pub fn aug_dim(&self) -> usize {
        self.hidden_dim() + self.feature_dim
    }
}

/// All trainable tensors. The same layout doubles as a gradient container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lstm_fwd: LstmParams,
    pub lstm_bwd: Option<LstmParams>,
    /// `aug_dim × 2·aug_dim`
    pub attn_w: Matrix,
    pub attn_v: Vec<f64>,
    pub out_w: Vec<f64>,
    pub out_b: f64,
}

/// A named parameter tensor viewed as a flat slice.
#[derive(Debug)]
pub struct TensorView<'a> {
    pub name: &'static str,
    pub shape: Vec<usize>,
    /// Weights enter the L2 penalty; biases do not.
    pub is_weight: bool,
    pub data: &'a [f64],
}

impl ModelParams {
    pub fn zeros(config: &ModelConfig) -> Self {
        let a = config.aug_dim();
        Self {
            lstm_fwd: LstmParams::zeros(config.window_dim(), config.hidden_size),
            lstm_bwd: config
                .bidirectional
                .then(|| LstmParams::zeros(config.window_dim(), config.hidden_size)),
            attn_w: Matrix::zeros(a, 2 * a),
            attn_v: vec![0.0; a],
            out_w: vec![0.0; a],
            out_b: 0.0,
        }
    }

    pub fn init(config: &ModelConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let a = config.aug_dim();
        let lstm_fwd = LstmParams::init(config.window_dim(), config.hidden_size, &mut rng);
        let lstm_bwd = config
            .bidirectional
            .then(|| LstmParams::init(config.window_dim(), config.hidden_size, &mut rng));
        let attn_w = Matrix::glorot(a, 2 * a, &mut rng);
        let attn_v = Matrix::glorot(a, 1, &mut rng).as_slice().to_vec();
        let out_w = Matrix::glorot(a, 1, &mut rng).as_slice().to_vec();
        Self {
            lstm_fwd,
            lstm_bwd,
            attn_w,
            attn_v,
            out_w,
            out_b: 0.0,
        }
    }

    pub fn tensors(&self) -> Vec<TensorView<'_>> {
        fn lstm<'a>(out: &mut Vec<TensorView<'a>>, p: &'a LstmParams, names: [&'static str; 3]) {
            out.push(TensorView {
                name: names[0],
                shape: vec![p.w_input.rows(), p.w_input.cols()],
                is_weight: true,
                data: p.w_input.as_slice(),
            });
            out.push(TensorView {
                name: names[1],
                shape: vec![p.w_hidden.rows(), p.w_hidden.cols()],
                is_weight: true,
                data: p.w_hidden.as_slice(),
            });
            out.push(TensorView {
                name: names[2],
                shape: vec![p.bias.len()],
                is_weight: false,
                data: &p.bias,
            });
        }
        let mut out = Vec::new();
        lstm(
            &mut out,
            &self.lstm_fwd,
            ["lstm_fwd.w_input", "lstm_fwd.w_hidden", "lstm_fwd.bias"],
        );
        if let Some(b) = &self.lstm_bwd {
            lstm(
                &mut out,
                b,
                ["lstm_bwd.w_input", "lstm_bwd.w_hidden", "lstm_bwd.bias"],
            );
        }
        out.push(TensorView {
            name: "attn.w",
            shape: vec![self.attn_w.rows(), self.attn_w.cols()],
            is_weight: true,
            data: self.attn_w.as_slice(),
        });
        out.push(TensorView {
            name: "attn.v",
            shape: vec![self.attn_v.len()],
            is_weight: true,
            data: &self.attn_v,
        });
        out.push(TensorView {
            name: "out.w",
            shape: vec![self.out_w.len()],
            is_weight: true,
            data: &self.out_w,
        });
        out.push(TensorView {
            name: "out.b",
            shape: vec![1],
            is_weight: false,
            data: std::slice::from_ref(&self.out_b),
        });
        out
    }

    /// Mutable slices in the same order as [`tensors`](Self::tensors).
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        let f = &mut self.lstm_fwd;
        out.push(f.w_input.as_mut_slice());
        out.push(f.w_hidden.as_mut_slice());
        out.push(&mut f.bias);
        if let Some(b) = &mut self.lstm_bwd {
            out.push(b.w_input.as_mut_slice());
            out.push(b.w_hidden.as_mut_slice());
            out.push(&mut b.bias);
        }
        out.push(self.attn_w.as_mut_slice());
        out.push(&mut self.attn_v);
        out.push(&mut self.out_w);
        out.push(std::slice::from_mut(&mut self.out_b));
        out
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }

    /// Sum of squared weight entries (biases excluded).
    pub fn l2_norm_sq(&self) -> f64 {
        self.tensors()
            .iter()
            .filter(|t| t.is_weight)
            .flat_map(|t| t.data.iter())
            .map(|w| w * w)
            .sum()
    }

    /// `self += scale * ∂(Σ w²)/∂self`, i.e. `2·scale·w` on weights only.
    pub fn add_l2_gradient(&mut self, params: &ModelParams, scale: f64) {
        let flags: Vec<bool> = params.tensors().iter().map(|t| t.is_weight).collect();
        let src: Vec<Vec<f64>> = params.tensors().iter().map(|t| t.data.to_vec()).collect();
        for ((dst, src), is_weight) in self.tensors_mut().into_iter().zip(src).zip(flags) {
            if is_weight {
                for (d, w) in dst.iter_mut().zip(src) {
                    *d += 2.0 * scale * w;
                }
            }
        }
    }

    /// `self -= lr * grads`
    pub fn sgd_step(&mut self, grads: &ModelParams, lr: f64) {
        let grads: Vec<&[f64]> = grads.tensors().into_iter().map(|t| t.data).collect();
        for (p, g) in self.tensors_mut().into_iter().zip(grads) {
            for (pi, gi) in p.iter_mut().zip(g) {
                *pi -= lr * gi;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.data.iter().all(|v| v.is_finite()))
    }

    /// Checks that every tensor has the shape implied by `config`.
    pub fn check_shapes(&self, config: &ModelConfig) -> Result<()> {
        let expected = ModelParams::zeros(config);
        let want: Vec<(&str, Vec<usize>)> = expected
            .tensors()
            .into_iter()
            .map(|t| (t.name, t.shape))
            .collect();
        let got: Vec<(&str, Vec<usize>)> = self
            .tensors()
            .into_iter()
            .map(|t| (t.name, t.shape))
            .collect();
        if want != got {
            return Err(Error::Shape(format!(
                "parameters {got:?} do not match config {want:?}"
            )));
        }
        Ok(())
    }
}

/// A configuration together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub params: ModelParams,
}

impl Model {
    pub fn new(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let params = ModelParams::init(&config);
        Ok(Self { config, params })
    }

    pub fn from_parts(config: ModelConfig, params: ModelParams) -> Result<Self> {
        config.validate()?;
        params.check_shapes(&config)?;
        Ok(Self { config, params })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ModelConfig {
        ModelConfig {
            embed_dim: 3,
            window_radius: 1,
            hidden_size: 4,
            bidirectional: true,
            feature_dim: 9,
            dropout_keep: 1.0,
            max_len: 50,
            seed: 1,
        }
    }

    #[test]
    fn shapes_follow_config() {
        let c = small();
        assert_eq!(c.aug_dim(), 17);
        let p = ModelParams::init(&c);
        let shapes: Vec<_> = p
            .tensors()
            .iter()
            .map(|t| (t.name, t.shape.clone()))
            .collect();
        assert_eq!(shapes[0], ("lstm_fwd.w_input", vec![16, 9]));
        assert_eq!(shapes[6], ("attn.w", vec![17, 34]));
        assert_eq!(shapes.len(), 10);
        p.check_shapes(&c).unwrap();
    }

    #[test]
    fn unidirectional_has_no_backward_lstm() {
        let c = ModelConfig {
            bidirectional: false,
            ..small()
        };
        let p = ModelParams::init(&c);
        assert!(p.lstm_bwd.is_none());
        assert!(p.tensors().iter().all(|t| !t.name.starts_with("lstm_bwd")));
    }

    #[test]
    fn dropping_features_shrinks_model() {
        let full = ModelParams::init(&small());
        let bare = ModelParams::init(&ModelConfig {
            feature_dim: 0,
            ..small()
        });
        assert!(bare.num_params() < full.num_params());
    }

    #[test]
    fn init_is_seeded() {
        assert_eq!(ModelParams::init(&small()), ModelParams::init(&small()));
        let other = ModelConfig { seed: 2, ..small() };
        assert_ne!(ModelParams::init(&small()), ModelParams::init(&other));
    }

    #[test]
    fn l2_excludes_biases() {
        let mut p = ModelParams::zeros(&small());
        p.out_b = 5.0;
        p.lstm_fwd.bias[0] = 3.0;
        assert_eq!(p.l2_norm_sq(), 0.0);
        p.out_w[0] = 2.0;
        p.attn_v[1] = -1.0;
        assert_eq!(p.l2_norm_sq(), 5.0);
    }

    #[test]
    fn config_validation() {
        assert!(ModelConfig {
            dropout_keep: 0.0,
            ..small()
        }
        .validate()
        .is_err());
        assert!(ModelConfig {
            hidden_size: 0,
            ..small()
        }
        .validate()
        .is_err());
        assert!(small().validate().is_ok());
    }
}
