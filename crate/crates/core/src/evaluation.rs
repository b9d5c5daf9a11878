//! Shared-task metrics, the binary-feature ablation and attention export.
//!
//! Reported metrics use predictions clipped to `[0, 1]`. The subset metrics
//! cover examples whose gold intensity is at least 0.5 and are absent when
//! fewer than two such examples exist.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Tweet;
use crate::embeddings::EmbeddingStore;
use crate::encode::Encoder;
use crate::error::{Error, Result};
use crate::features::FEATURE_DIM;
use crate::metrics::{pearson, spearman};
use crate::model::{EncodedTweet, Model, ModelConfig};
use crate::training::{train, TrainConfig, TrainOutcome};

pub const SUBSET_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub pearson_all: f64,
    pub spearman_all: f64,
    pub pearson_ge05: Option<f64>,
    pub spearman_ge05: Option<f64>,
    pub n_all: usize,
    pub n_ge05: usize,
}

impl EvalReport {
    pub const KEYS: [&'static str; 6] = [
        "pearson_all",
        "spearman_all",
        "pearson_ge05",
        "spearman_ge05",
        "n_all",
        "n_ge05",
    ];

    /// Flat `key = value` block; absent subset metrics are written as `NA`.
    pub fn to_kv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
        let mut out = String::new();
        writeln!(out, "pearson_all = {}", self.pearson_all).unwrap();
        writeln!(out, "spearman_all = {}", self.spearman_all).unwrap();
        writeln!(out, "pearson_ge05 = {}", opt(self.pearson_ge05)).unwrap();
        writeln!(out, "spearman_ge05 = {}", opt(self.spearman_ge05)).unwrap();
        writeln!(out, "n_all = {}", self.n_all).unwrap();
        writeln!(out, "n_ge05 = {}", self.n_ge05).unwrap();
        out
    }
}

pub fn clip_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Metrics of raw predictions against gold; predictions are clipped first.
pub fn score(predictions: &[f64], golds: &[f64]) -> Result<EvalReport> {
    if predictions.len() != golds.len() {
        return Err(Error::InvalidInput(format!(
            "{} predictions for {} gold values",
            predictions.len(),
            golds.len()
        )));
    }
    if golds.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "evaluation needs at least 2 labeled examples, got {}",
            golds.len()
        )));
    }
    let clipped: Vec<f64> = predictions.iter().copied().map(clip_unit).collect();
    let (sub_p, sub_g): (Vec<f64>, Vec<f64>) = clipped
        .iter()
        .zip(golds)
        .filter(|(_, &g)| g >= SUBSET_THRESHOLD)
        .map(|(&p, &g)| (p, g))
        .unzip();
    let subset = sub_g.len() >= 2;
    Ok(EvalReport {
        pearson_all: pearson(&clipped, golds)?,
        spearman_all: spearman(&clipped, golds)?,
        pearson_ge05: if subset {
            Some(pearson(&sub_p, &sub_g)?)
        } else {
            None
        },
        spearman_ge05: if subset {
            Some(spearman(&sub_p, &sub_g)?)
        } else {
            None
        },
        n_all: golds.len(),
        n_ge05: sub_g.len(),
    })
}

/// Eval-mode metrics over the labeled examples of `dataset`.
pub fn evaluate(model: &Model, dataset: &[EncodedTweet]) -> Result<EvalReport> {
    let labeled: Vec<&EncodedTweet> = dataset.iter().filter(|t| t.gold.is_some()).collect();
    if labeled.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "evaluation needs at least 2 labeled examples, got {}",
            labeled.len()
        )));
    }
    let golds: Vec<f64> = labeled.iter().filter_map(|t| t.gold).collect();
    let predictions: Vec<f64> = model
        .forward(labeled.iter().copied(), None)?
        .iter()
        .map(|t| t.prediction)
        .collect();
    score(&predictions, &golds)
}

/// Tweets with their aligned POS tags (empty when no tagger output exists).
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub tweets: Vec<Tweet>,
    pub tags: Vec<Vec<char>>,
}

impl Corpus {
    pub fn encode(&self, store: &EmbeddingStore, feature_dim: usize) -> Result<Vec<EncodedTweet>> {
        Encoder::new(store, feature_dim).encode_all(&self.tweets, &self.tags)
    }
}

#[derive(Debug, Clone)]
pub struct AblationReport {
    pub with_features: TrainOutcome,
    pub without_features: TrainOutcome,
}

impl AblationReport {
    fn best(o: &TrainOutcome) -> f64 {
        o.history.best_val_pearson.unwrap_or(f64::NAN)
    }

    pub fn pearson_with(&self) -> f64 {
        Self::best(&self.with_features)
    }

    pub fn pearson_without(&self) -> f64 {
        Self::best(&self.without_features)
    }

    /// With-features minus without-features dev Pearson.
    pub fn difference(&self) -> f64 {
        self.pearson_with() - self.pearson_without()
    }

    pub fn to_kv(&self) -> String {
        format!(
            "pearson_with_features = {}\npearson_without_features = {}\ndifference = {}\n",
            self.pearson_with(),
            self.pearson_without(),
            self.difference()
        )
    }
}

/// Trains twice with identical seeds: once with all binary features, once
/// with the feature block removed from the augmented state.
pub fn ablation(
    model_config: &ModelConfig,
    train_config: &TrainConfig,
    train_corpus: &Corpus,
    dev_corpus: &Corpus,
    store: &EmbeddingStore,
) -> Result<AblationReport> {
    let run = |feature_dim: usize| -> Result<TrainOutcome> {
        let cfg = ModelConfig {
            feature_dim,
            ..model_config.clone()
        };
        let tr = train_corpus.encode(store, feature_dim)?;
        let dv = dev_corpus.encode(store, feature_dim)?;
        train(&cfg, train_config, &tr, &dv)
    };
    Ok(AblationReport {
        with_features: run(FEATURE_DIM)?,
        without_features: run(0)?,
    })
}

/// Per-tweet attention weights over its (truncated) tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionTrace {
    pub id: String,
    pub tokens: Vec<String>,
    pub weights: Vec<f64>,
    /// Clipped to `[0, 1]`.
    pub prediction: f64,
    pub gold: Option<f64>,
}

pub fn attention_traces(model: &Model, dataset: &[EncodedTweet]) -> Result<Vec<AttentionTrace>> {
    let traces = model.forward(dataset, None)?;
    Ok(dataset
        .iter()
        .zip(traces)
        .map(|(tweet, tr)| AttentionTrace {
            id: tweet.id.clone(),
            tokens: tweet.tokens[..tr.len].to_vec(),
            weights: tr.weights().to_vec(),
            prediction: clip_unit(tr.prediction),
            gold: tweet.gold,
        })
        .collect())
}

/// One JSON object per line.
pub fn write_attention_jsonl(path: impl AsRef<Path>, traces: &[AttentionTrace]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for t in traces {
        let line = serde_json::to_string(t).expect("attention trace serializes");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_attention_jsonl(path: impl AsRef<Path>) -> Result<Vec<AttentionTrace>> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// `id,token,weight` rows for heatmap plotting.
pub fn write_attention_csv(path: impl AsRef<Path>, traces: &[AttentionTrace]) -> Result<()> {
    let path = path.as_ref();
    let to_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidInput(format!("{other:?}")),
    };
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    w.write_record(["id", "token", "weight"]).map_err(to_err)?;
    for t in traces {
        for (tok, weight) in t.tokens.iter().zip(&t.weights) {
            w.write_record([t.id.as_str(), tok.as_str(), &weight.to_string()])
                .map_err(to_err)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Computes traces for `dataset` and writes them as JSON lines to `path`.
pub fn export_attention(
    model: &Model,
    dataset: &[EncodedTweet],
    path: impl AsRef<Path>,
) -> Result<Vec<AttentionTrace>> {
    let traces = attention_traces(model, dataset)?;
    write_attention_jsonl(path, &traces)?;
    Ok(traces)
}
