use rand::{Rng, RngCore};

use super::attention::{attention, attention_backward, AttentionOutput};
use super::lstm::{lstm_backward, lstm_forward, LstmTrace};
use super::matrix::dot;
use super::{Model, ModelParams};
use crate::error::{Error, Result};

/// A tweet turned into model inputs.
///
/// `embeddings` and `features` may extend past `len` (padding); only the
/// first `len` positions, capped at the model's `max_len`, are ever read.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedTweet {
    pub id: String,
    pub tokens: Vec<String>,
    pub embeddings: Vec<Vec<f64>>,
    pub features: Vec<Vec<f64>>,
    pub len: usize,
    pub gold: Option<f64>,
}

/// Intermediates of one forward pass, kept for backpropagation and inspection.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub id: String,
    /// Valid positions processed.
    pub len: usize,
    /// Validity over the (truncated) input buffer.
    pub mask: Vec<bool>,
    pub windows: Vec<Vec<f64>>,
    pub lstm_fwd: LstmTrace,
    pub lstm_bwd: Option<LstmTrace>,
    /// LSTM outputs after dropout.
    pub hidden: Vec<Vec<f64>>,
    /// Inverted-dropout scale factors (0 or 1/keep), train mode only.
    pub dropout: Option<Vec<Vec<f64>>>,
    /// Augmented states over the mask length; padding rows are zero.
    pub augmented: Vec<Vec<f64>>,
    pub attention: AttentionOutput,
    pub prediction: f64,
}

impl ForwardTrace {
    /// Attention weights of the valid positions.
    pub fn weights(&self) -> &[f64] {
        &self.attention.weights[..self.len]
    }
}

/// Gradients with respect to the word embeddings of each tweet.
pub type InputGradients = Vec<Vec<Vec<f64>>>;

/// Concatenates `2d + 1` neighbouring vectors around each position; positions
/// outside the sequence contribute zeros.
pub fn build_windows(embedded: &[Vec<f64>], radius: usize) -> Vec<Vec<f64>> {
    let Some(first) = embedded.first() else {
        return Vec::new();
    };
    let dim = first.len();
    let n = embedded.len() as isize;
    let r = radius as isize;
    (0..n)
        .map(|i| {
            let mut w = Vec::with_capacity((2 * radius + 1) * dim);
            for k in i - r..=i + r {
                if (0..n).contains(&k) {
                    w.extend_from_slice(&embedded[k as usize]);
                } else {
                    w.extend(std::iter::repeat_n(0.0, dim));
                }
            }
            w
        })
        .collect()
}

/// `[h_i; b_i]` per position.
pub fn augment(hidden: &[Vec<f64>], features: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if hidden.len() != features.len() {
        return Err(Error::Shape(format!(
            "{} hidden states but {} feature vectors",
            hidden.len(),
            features.len()
        )));
    }
    Ok(hidden
        .iter()
        .zip(features)
        .map(|(h, b)| h.iter().chain(b).copied().collect())
        .collect())
}

/// Linear head `w · t + b`.
pub fn predict(sentence: &[f64], out_w: &[f64], out_b: f64) -> f64 {
    dot(out_w, sentence) + out_b
}

impl Model {
    /// Runs the model on a batch. Passing an RNG selects train mode, which
    /// applies inverted dropout to the LSTM outputs; `None` is eval mode.
    pub fn forward<'t>(
        &self,
        batch: impl IntoIterator<Item = &'t EncodedTweet>,
        mut dropout_rng: Option<&mut dyn RngCore>,
    ) -> Result<Vec<ForwardTrace>> {
        let mut traces = Vec::new();
        for tweet in batch {
            traces.push(self.forward_one(tweet, dropout_rng.as_deref_mut())?);
        }
        Ok(traces)
    }

    pub fn predict_batch(&self, batch: &[EncodedTweet]) -> Result<Vec<f64>> {
        Ok(self
            .forward(batch, None)?
            .iter()
            .map(|t| t.prediction)
            .collect())
    }

    fn forward_one<'r>(
        &self,
        tweet: &EncodedTweet,
        dropout_rng: Option<&mut (dyn RngCore + 'r)>,
    ) -> Result<ForwardTrace> {
        let cfg = &self.config;
        let p = &self.params;
        let n = tweet.len.min(cfg.max_len);
        if n == 0 {
            return Err(Error::EmptyTweet {
                id: tweet.id.clone(),
            });
        }
        if tweet.embeddings.len() < tweet.len || tweet.features.len() < tweet.len {
            return Err(Error::Shape(format!(
                "tweet {}: buffers shorter than its length {}",
                tweet.id, tweet.len
            )));
        }
        if let Some(bad) = tweet.embeddings[..n]
            .iter()
            .find(|e| e.len() != cfg.embed_dim)
        {
            return Err(Error::Shape(format!(
                "tweet {}: embedding of size {} for model embed_dim {}",
                tweet.id,
                bad.len(),
                cfg.embed_dim
            )));
        }
        if let Some(bad) = tweet.features[..n]
            .iter()
            .find(|f| f.len() != cfg.feature_dim)
        {
            return Err(Error::Shape(format!(
                "tweet {}: {} features for model feature_dim {}",
                tweet.id,
                bad.len(),
                cfg.feature_dim
            )));
        }
        let mask_len = tweet.embeddings.len().min(cfg.max_len);
        let mask: Vec<bool> = (0..mask_len).map(|i| i < n).collect();

        let windows = build_windows(&tweet.embeddings[..n], cfg.window_radius);
        let lstm_fwd = lstm_forward(&windows, &p.lstm_fwd, false);
        let lstm_bwd = p.lstm_bwd.as_ref().map(|b| lstm_forward(&windows, b, true));

        let mut hidden: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut h = lstm_fwd.steps[i].hidden.clone();
                if let Some(b) = &lstm_bwd {
                    h.extend_from_slice(&b.steps[i].hidden);
                }
                h
            })
            .collect();

        let dropout = match dropout_rng {
            Some(rng) if cfg.dropout_keep < 1.0 => {
                let keep = cfg.dropout_keep;
                let scales: Vec<Vec<f64>> = hidden
                    .iter()
                    .map(|h| {
                        h.iter()
                            .map(|_| {
                                if rng.gen::<f64>() < keep {
                                    1.0 / keep
                                } else {
                                    0.0
                                }
                            })
                            .collect()
                    })
                    .collect();
                for (h, s) in hidden.iter_mut().zip(&scales) {
                    for (hv, sv) in h.iter_mut().zip(s) {
                        *hv *= sv;
                    }
                }
                Some(scales)
            }
            _ => None,
        };

        let mut augmented = augment(&hidden, &tweet.features[..n])?;
        augmented.resize(mask_len, vec![0.0; cfg.aug_dim()]);
        let attention = attention(&augmented, &mask, &p.attn_w, &p.attn_v)?;
        let prediction = predict(&attention.sentence, &p.out_w, p.out_b);

        Ok(ForwardTrace {
            id: tweet.id.clone(),
            len: n,
            mask,
            windows,
            lstm_fwd,
            lstm_bwd,
            hidden,
            dropout,
            augmented,
            attention,
            prediction,
        })
    }

    /// Parameter gradients of `Σ_b upstream[b] · ŷ_b`.
    pub fn backward(&self, traces: &[ForwardTrace], upstream: &[f64]) -> Result<ModelParams> {
        self.backward_impl(traces, upstream, false).map(|(g, _)| g)
    }

    /// Like [`backward`](Self::backward), also returning gradients with respect
    /// to each tweet's embeddings (rows past the processed length are zero).
    pub fn backward_with_inputs(
        &self,
        traces: &[ForwardTrace],
        upstream: &[f64],
    ) -> Result<(ModelParams, InputGradients)> {
        self.backward_impl(traces, upstream, true)
    }

    fn backward_impl(
        &self,
        traces: &[ForwardTrace],
        upstream: &[f64],
        want_inputs: bool,
    ) -> Result<(ModelParams, InputGradients)> {
        if traces.len() != upstream.len() {
            return Err(Error::Shape(format!(
                "{} traces but {} upstream gradients",
                traces.len(),
                upstream.len()
            )));
        }
        let cfg = &self.config;
        let p = &self.params;
        let mut grads = ModelParams::zeros(cfg);
        let mut input_grads = Vec::new();
        let hs = cfg.hidden_size;

        for (trace, &g) in traces.iter().zip(upstream) {
            let n = trace.len;
            let mut d_embed = vec![vec![0.0; cfg.embed_dim]; trace.mask.len()];
            if g == 0.0 {
                if want_inputs {
                    input_grads.push(d_embed);
                }
                continue;
            }
            let t = &trace.attention.sentence;
            for (gw, tv) in grads.out_w.iter_mut().zip(t) {
                *gw += g * tv;
            }
            grads.out_b += g;
            let d_sentence: Vec<f64> = p.out_w.iter().map(|w| g * w).collect();

            let mut d_aug = vec![vec![0.0; cfg.aug_dim()]; trace.mask.len()];
            attention_backward(
                &trace.augmented,
                &trace.mask,
                &p.attn_w,
                &p.attn_v,
                &trace.attention,
                &d_sentence,
                &mut grads.attn_w,
                &mut grads.attn_v,
                &mut d_aug,
            );

            let mut d_fwd = vec![vec![0.0; hs]; n];
            let mut d_bwd = vec![vec![0.0; hs]; n];
            for i in 0..n {
                for k in 0..cfg.hidden_dim() {
                    let mut d = d_aug[i][k];
                    if let Some(scales) = &trace.dropout {
                        d *= scales[i][k];
                    }
                    if k < hs {
                        d_fwd[i][k] = d;
                    } else {
                        d_bwd[i][k - hs] = d;
                    }
                }
            }

            let mut d_windows = vec![vec![0.0; cfg.window_dim()]; n];
            let dw = want_inputs.then_some(d_windows.as_mut_slice());
            lstm_backward(
                &trace.windows,
                &p.lstm_fwd,
                &trace.lstm_fwd,
                &d_fwd,
                &mut grads.lstm_fwd,
                dw,
            );
            if let (Some(bp), Some(bt), Some(bg)) =
                (&p.lstm_bwd, &trace.lstm_bwd, grads.lstm_bwd.as_mut())
            {
                let dw = want_inputs.then_some(d_windows.as_mut_slice());
                lstm_backward(&trace.windows, bp, bt, &d_bwd, bg, dw);
            }

            if want_inputs {
                let r = cfg.window_radius as isize;
                let e = cfg.embed_dim;
                for (i, dwin) in d_windows.iter().enumerate() {
                    for (slot, chunk) in dwin.chunks_exact(e).enumerate() {
                        let pos = i as isize - r + slot as isize;
                        if (0..n as isize).contains(&pos) {
                            for (a, b) in d_embed[pos as usize].iter_mut().zip(chunk) {
                                *a += b;
                            }
                        }
                    }
                }
                input_grads.push(d_embed);
            }
        }
        Ok((grads, input_grads))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn config() -> ModelConfig {
        ModelConfig {
            embed_dim: 2,
            window_radius: 1,
            hidden_size: 3,
            bidirectional: true,
            feature_dim: 9,
            dropout_keep: 0.8,
            max_len: 50,
            seed: 7,
        }
    }

    fn tweet(n: usize) -> EncodedTweet {
        EncodedTweet {
            id: format!("t{n}"),
            tokens: (0..n).map(|i| format!("w{i}")).collect(),
            embeddings: (0..n).map(|i| vec![0.1 * i as f64, -0.2]).collect(),
            features: (0..n)
                .map(|i| {
                    let mut f = vec![0.0; 9];
                    f[i % 9] = 1.0;
                    f
                })
                .collect(),
            len: n,
            gold: None,
        }
    }

    #[test]
    fn windows_identity_for_radius_zero() {
        let xs = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert_eq!(build_windows(&xs, 0), xs);
    }

    #[test]
    fn windows_zero_pad_at_boundaries() {
        let (a, b, c) = (vec![1.0], vec![2.0], vec![3.0]);
        let w = build_windows(&[a, b, c], 1);
        assert_eq!(
            w,
            vec![
                vec![0.0, 1.0, 2.0],
                vec![1.0, 2.0, 3.0],
                vec![2.0, 3.0, 0.0]
            ]
        );
        let w = build_windows(&[vec![5.0, 6.0]], 2);
        assert_eq!(
            w,
            vec![vec![0.0, 0.0, 0.0, 0.0, 5.0, 6.0, 0.0, 0.0, 0.0, 0.0]]
        );
    }

    #[test]
    fn augment_concatenates() {
        let aug = augment(&[vec![1.0; 4]], &[vec![0.0; 9]]).unwrap();
        assert_eq!(aug[0].len(), 13);
        assert!(aug[0][4..].iter().all(|&v| v == 0.0));
        assert!(augment(&[], &[]).unwrap().is_empty());
        assert!(augment(&[vec![1.0]], &[]).is_err());
    }

    #[test]
    fn predict_is_affine() {
        assert_eq!(predict(&[3.0, -1.0], &[0.0, 0.0], 0.5), 0.5);
        assert_eq!(predict(&[0.0, 1.0], &[0.25, -0.75], 0.5), -0.25);
    }

    #[test]
    fn eval_mode_is_deterministic() {
        let m = Model::new(config()).unwrap();
        let a = m.predict_batch(&[tweet(4)]).unwrap();
        let b = m.predict_batch(&[tweet(4)]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn keep_one_makes_train_equal_eval() {
        let m = Model::new(ModelConfig {
            dropout_keep: 1.0,
            ..config()
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let train = m.forward(&[tweet(5)], Some(&mut rng)).unwrap();
        let eval = m.forward(&[tweet(5)], None).unwrap();
        assert_eq!(train[0].prediction, eval[0].prediction);
    }

    #[test]
    fn dropout_changes_train_mode() {
        let m = Model::new(config()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let train = m.forward(&[tweet(8)], Some(&mut rng)).unwrap();
        let eval = m.forward(&[tweet(8)], None).unwrap();
        assert_ne!(train[0].prediction, eval[0].prediction);
        let scales = train[0].dropout.as_ref().unwrap();
        assert!(scales.iter().flatten().all(|&s| s == 0.0 || s == 1.0 / 0.8));
    }

    #[test]
    fn long_tweets_are_truncated() {
        let m = Model::new(config()).unwrap();
        let tr = m.forward(&[tweet(60)], None).unwrap();
        assert_eq!(tr[0].len, 50);
        assert_eq!(tr[0].mask.len(), 50);
        assert_eq!(tr[0].weights().len(), 50);
    }

    #[test]
    fn empty_tweet_error_names_it() {
        let m = Model::new(config()).unwrap();
        let err = m.forward(&[tweet(0)], None).unwrap_err();
        assert!(err.to_string().contains("t0"), "{err}");
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let m = Model::new(config()).unwrap();
        let tr = m.forward(&[tweet(3), tweet(5)], None).unwrap();
        let g = m.backward(&tr, &[0.0, 0.0]).unwrap();
        assert!(g.tensors().iter().all(|t| t.data.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn zero_params_predict_bias() {
        let mut m = Model::new(config()).unwrap();
        m.params = ModelParams::zeros(&m.config);
        m.params.out_b = 0.37;
        for n in [1, 4, 9] {
            assert_eq!(m.predict_batch(&[tweet(n)]).unwrap(), vec![0.37]);
        }
    }
}
