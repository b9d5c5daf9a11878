//! Negative-Pearson loss and the mini-batch SGD training loop.
//!
//! The loss on a batch is `-ρ(ŷ, y) + λ Σ w²`, with the L2 sum taken over
//! weight tensors only. The learning rate decays exponentially in steps,
//! `lr0 · ratio^⌊step / decay_every⌋`, and training stops early once the dev
//! Pearson has not improved for `patience_steps` SGD steps.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metrics::{centered_pair, pearson};
use crate::model::{EncodedTweet, Model, ModelConfig, ModelParams};

/// `-ρ(predictions, golds) + λ · Σ w²`
pub fn loss(predictions: &[f64], golds: &[f64], params: &ModelParams, lambda: f64) -> Result<f64> {
    Ok(-pearson(predictions, golds)? + lambda * params.l2_norm_sq())
}

/// `∂(-ρ)/∂ŷ`. Zero when predictions or golds are constant.
pub fn loss_gradient(predictions: &[f64], golds: &[f64]) -> Result<Vec<f64>> {
    // validates lengths
    let rho = pearson(predictions, golds)?;
    let Some((pc, gc, spp, sgg)) = centered_pair(predictions, golds) else {
        return Ok(vec![0.0; predictions.len()]);
    };
    let scale = 1.0 / (spp.sqrt() * sgg.sqrt());
    Ok(pc
        .iter()
        .zip(&gc)
        .map(|(p, g)| -(g * scale - rho * p / spp))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub lr0: f64,
    pub decay_ratio: f64,
    pub decay_every: usize,
    pub lambda: f64,
    pub patience_steps: usize,
    pub eval_every: usize,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 16,
            lr0: 0.1,
            decay_ratio: 0.9,
            decay_every: 100,
            lambda: 0.01,
            patience_steps: 1000,
            eval_every: 50,
            max_steps: 20_000,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.batch_size < 2 {
            return fail(format!("batch_size {} < 2", self.batch_size));
        }
        if !(self.decay_ratio > 0.0 && self.decay_ratio <= 1.0) {
            return fail(format!("decay_ratio {} outside (0, 1]", self.decay_ratio));
        }
        if self.decay_every == 0 || self.eval_every == 0 {
            return fail("decay_every and eval_every must be positive".into());
        }
        if self.patience_steps < self.eval_every {
            return fail(format!(
                "patience_steps {} < eval_every {}",
                self.patience_steps, self.eval_every
            ));
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return fail(format!("lr0 {} must be positive", self.lr0));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return fail(format!("lambda {} must be non-negative", self.lambda));
        }
        Ok(())
    }

    pub fn learning_rate(&self, step: usize) -> f64 {
        let exponent = (step / self.decay_every) as i32;
        self.lr0 * self.decay_ratio.powi(exponent)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub step: usize,
    pub lr: f64,
    /// Mean batch loss since the previous evaluation.
    pub train_loss: f64,
    pub dev_pearson: f64,
}

impl EvalRecord {
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}",
            self.step, self.lr, self.train_loss, self.dev_pearson
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainHistory {
    pub records: Vec<EvalRecord>,
    pub best_step: Option<usize>,
    pub best_val_pearson: Option<f64>,
}

impl TrainHistory {
    pub const HEADER: &'static str = "step\tlr\ttrain_loss\tdev_pearson";

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", Self::HEADER).unwrap();
        for r in &self.records {
            writeln!(out, "{}", r.to_line()).unwrap();
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the best evaluation (initial parameters if none ran).
    pub model: Model,
    pub history: TrainHistory,
}

fn golds(set: &[EncodedTweet], name: &str) -> Result<Vec<f64>> {
    set.iter()
        .map(|t| {
            t.gold.ok_or_else(|| {
                Error::Config(format!("{name} example {} has no gold intensity", t.id))
            })
        })
        .collect()
}

/// Pearson of raw (unclipped) eval-mode predictions against gold.
pub fn dev_pearson(model: &Model, dev: &[EncodedTweet]) -> Result<f64> {
    let gold = golds(dev, "dev")?;
    let pred = model.predict_batch(dev)?;
    pearson(&pred, &gold)
}

pub fn train(
    model_config: &ModelConfig,
    train_config: &TrainConfig,
    train_set: &[EncodedTweet],
    dev_set: &[EncodedTweet],
) -> Result<TrainOutcome> {
    train_with_observer(model_config, train_config, train_set, dev_set, |_| {})
}

/// [`train`], calling `on_eval` after every evaluation.
pub fn train_with_observer(
    model_config: &ModelConfig,
    train_config: &TrainConfig,
    train_set: &[EncodedTweet],
    dev_set: &[EncodedTweet],
    mut on_eval: impl FnMut(&EvalRecord),
) -> Result<TrainOutcome> {
    train_config.validate()?;
    let mut model = Model::new(model_config.clone())?;
    if train_set.is_empty() || dev_set.is_empty() {
        return Err(Error::Config("train and dev sets must be non-empty".into()));
    }
    let train_gold = golds(train_set, "train")?;
    let dev_gold = golds(dev_set, "dev")?;
    if dev_gold.len() < 2 || dev_gold.iter().all(|&g| g == dev_gold[0]) {
        return Err(Error::Config(
            "dev set gold intensities are constant; Pearson is undefined".into(),
        ));
    }
    if train_config.max_steps > 0 && train_set.len() < train_config.batch_size {
        return Err(Error::Config(format!(
            "training set of {} examples is smaller than batch_size {}",
            train_set.len(),
            train_config.batch_size
        )));
    }

    let mut history = TrainHistory::default();
    let mut best = model.clone();
    let mut best_pearson = f64::NEG_INFINITY;
    let mut best_step = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(train_config.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut step = 0;
    let (mut loss_sum, mut loss_count) = (0.0, 0usize);

    'epochs: while step < train_config.max_steps {
        order.shuffle(&mut rng);
        for chunk in order.chunks_exact(train_config.batch_size) {
            let gold: Vec<f64> = chunk.iter().map(|&i| train_gold[i]).collect();
            let lr = train_config.learning_rate(step);

            let batch = chunk.iter().map(|&i| &train_set[i]);
            let traces = model.forward(batch, Some(&mut rng))?;
            let pred: Vec<f64> = traces.iter().map(|t| t.prediction).collect();
            let batch_loss = loss(&pred, &gold, &model.params, train_config.lambda)?;
            if !batch_loss.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "training diverged at step {step} (loss {batch_loss})"
                )));
            }
            let upstream = loss_gradient(&pred, &gold)?;
            let mut grads = model.backward(&traces, &upstream)?;
            grads.add_l2_gradient(&model.params, train_config.lambda);
            model.params.sgd_step(&grads, lr);
            step += 1;
            loss_sum += batch_loss;
            loss_count += 1;

            if step % train_config.eval_every == 0 || step == train_config.max_steps {
                let dev_p = dev_pearson(&model, dev_set)?;
                let record = EvalRecord {
                    step,
                    lr,
                    train_loss: loss_sum / loss_count as f64,
                    dev_pearson: dev_p,
                };
                on_eval(&record);
                history.records.push(record);
                loss_sum = 0.0;
                loss_count = 0;
                if dev_p > best_pearson {
                    best_pearson = dev_p;
                    best_step = step;
                    best = model.clone();
                    history.best_step = Some(step);
                    history.best_val_pearson = Some(dev_p);
                }
                if step - best_step >= train_config.patience_steps {
                    break 'epochs;
                }
            }
            if step >= train_config.max_steps {
                break 'epochs;
            }
        }
    }

    Ok(TrainOutcome {
        model: best,
        history,
    })
}
