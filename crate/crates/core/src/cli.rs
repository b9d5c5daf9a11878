//! Command implementations behind the `intensity` binary.
//!
//! Each command writes human-readable output to the given writer and its
//! artifacts to disk. `train` fills the output directory with:
//!
//! | file              | content                                   |
//! |-------------------|-------------------------------------------|
//! | `checkpoint.json` | best-step model and embedding fingerprint |
//! | `history.tsv`     | `step  lr  train_loss  dev_pearson`       |
//! | `eval.txt`        | dev metrics as `key = value`              |
//! | `attention.jsonl` | dev attention weights, one tweet per line |
//! | `attention.csv`   | `id,token,weight` rows                    |

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::checkpoint::Checkpoint;
use crate::data::{self, corpus_stats, load_pos_tags, parse_dataset, vocabulary, Tweet};
use crate::embeddings::EmbeddingStore;
use crate::evaluation::{
    attention_traces, clip_unit, evaluate, write_attention_csv, write_attention_jsonl, Corpus,
    EvalReport,
};
use crate::features::featurize_tweet;
use crate::model::{EncodedTweet, Model};
use crate::run_config::RunConfig;
use crate::training::{train_with_observer, TrainHistory};

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const HISTORY_FILE: &str = "history.tsv";
pub const EVAL_FILE: &str = "eval.txt";
pub const ATTENTION_FILE: &str = "attention.jsonl";
pub const ATTENTION_CSV_FILE: &str = "attention.csv";

fn load_corpus(path: &Path, pos: Option<&Path>) -> Result<Corpus> {
    let tweets = parse_dataset(path).with_context(|| format!("reading {}", path.display()))?;
    let tags = load_pos_tags(pos, &tweets)?;
    Ok(Corpus { tweets, tags })
}

/// Embeddings restricted to the vocabulary of `corpora`.
fn load_store(path: &Path, dim: Option<usize>, corpora: &[&Corpus]) -> Result<EmbeddingStore> {
    let mut vocab = HashSet::new();
    for c in corpora {
        vocab.extend(vocabulary(&c.tweets));
    }
    EmbeddingStore::load_filtered(path, dim, &vocab)
        .with_context(|| format!("loading embeddings {}", path.display()))
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

pub fn cmd_train(cfg: &RunConfig, out: &mut dyn Write) -> Result<TrainHistory> {
    cfg.validate_for_training()?;
    let (train_path, dev_path, emb_path) = match (&cfg.train, &cfg.dev, &cfg.embeddings) {
        (Some(t), Some(d), Some(e)) => (t, d, e),
        _ => unreachable!("validated"),
    };
    let train_corpus = load_corpus(train_path, cfg.train_pos.as_deref())?;
    let dev_corpus = load_corpus(dev_path, cfg.dev_pos.as_deref())?;
    let test_corpus = cfg
        .test
        .as_deref()
        .map(|p| load_corpus(p, cfg.test_pos.as_deref()))
        .transpose()?;
    let mut corpora = vec![&train_corpus, &dev_corpus];
    corpora.extend(test_corpus.as_ref());
    let store = load_store(emb_path, cfg.embed_dim, &corpora)?;
    if let Some(emotion) = cfg.emotion {
        for t in train_corpus.tweets.iter().chain(&dev_corpus.tweets) {
            if t.emotion != emotion {
                bail!(
                    "tweet {} is labeled {} but the run is for {emotion}",
                    t.id,
                    t.emotion
                );
            }
        }
    }

    let mut model_cfg = cfg.model.clone();
    model_cfg.embed_dim = store.dim();
    let train_set = train_corpus.encode(&store, model_cfg.feature_dim)?;
    let dev_set = dev_corpus.encode(&store, model_cfg.feature_dim)?;

    fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    writeln!(out, "{}", TrainHistory::HEADER)?;
    let mut io_err = None;
    let outcome = train_with_observer(&model_cfg, &cfg.training, &train_set, &dev_set, |r| {
        if let Err(e) = writeln!(out, "{}", r.to_line()) {
            io_err.get_or_insert(e);
        }
    })?;
    if let Some(e) = io_err {
        return Err(e.into());
    }

    let ck = Checkpoint::from_model(&outcome.model, store.fingerprint(emb_path));
    ck.save(cfg.out_dir.join(CHECKPOINT_FILE))?;
    write_file(&cfg.out_dir.join(HISTORY_FILE), &outcome.history.to_tsv())?;
    let report = evaluate(&outcome.model, &dev_set)?;
    write_file(&cfg.out_dir.join(EVAL_FILE), &report.to_kv())?;
    let traces = attention_traces(&outcome.model, &dev_set)?;
    write_attention_jsonl(cfg.out_dir.join(ATTENTION_FILE), &traces)?;
    write_attention_csv(cfg.out_dir.join(ATTENTION_CSV_FILE), &traces)?;

    match (outcome.history.best_step, outcome.history.best_val_pearson) {
        (Some(s), Some(p)) => writeln!(out, "best step {s}: dev pearson {p}")?,
        _ => writeln!(out, "no evaluation ran; saved initial parameters")?,
    }
    write!(out, "{}", report.to_kv())?;
    Ok(outcome.history)
}

/// Options shared by the commands that apply a trained checkpoint.
#[derive(Debug, Clone)]
pub struct ApplyArgs {
    pub checkpoint: PathBuf,
    pub dataset: PathBuf,
    pub pos: Option<PathBuf>,
    /// Defaults to the path recorded in the checkpoint.
    pub embeddings: Option<PathBuf>,
}

struct Loaded {
    model: Model,
    corpus: Corpus,
    encoded: Vec<EncodedTweet>,
}

fn load_for_apply(args: &ApplyArgs) -> Result<Loaded> {
    let ck = Checkpoint::load(&args.checkpoint)
        .with_context(|| format!("reading checkpoint {}", args.checkpoint.display()))?;
    let model = ck.to_model()?;
    let corpus = load_corpus(&args.dataset, args.pos.as_deref())?;
    let emb_path = args
        .embeddings
        .clone()
        .unwrap_or_else(|| PathBuf::from(&ck.embeddings.path));
    let store = load_store(&emb_path, Some(model.config.embed_dim), &[&corpus])?;
    ck.check_embeddings(&store.fingerprint(&emb_path))?;
    let encoded = corpus.encode(&store, model.config.feature_dim)?;
    Ok(Loaded {
        model,
        corpus,
        encoded,
    })
}

/// Writes the dataset back with the intensity column replaced by clipped
/// predictions, preserving row order.
pub fn cmd_predict(args: &ApplyArgs, output: &Path, out: &mut dyn Write) -> Result<()> {
    let loaded = load_for_apply(args)?;
    let predictions = loaded.model.predict_batch(&loaded.encoded)?;
    let rows: Vec<Tweet> = loaded
        .corpus
        .tweets
        .iter()
        .zip(&predictions)
        .map(|(t, &p)| Tweet {
            intensity: Some(clip_unit(p)),
            ..t.clone()
        })
        .collect();
    data::write_dataset(output, &rows)?;
    writeln!(
        out,
        "wrote {} predictions to {}",
        rows.len(),
        output.display()
    )?;
    Ok(())
}

pub fn cmd_eval(args: &ApplyArgs, out: &mut dyn Write) -> Result<EvalReport> {
    let loaded = load_for_apply(args)?;
    let report = evaluate(&loaded.model, &loaded.encoded)?;
    write!(out, "{}", report.to_kv())?;
    Ok(report)
}

pub fn cmd_attention(
    args: &ApplyArgs,
    output: &Path,
    csv: Option<&Path>,
    out: &mut dyn Write,
) -> Result<()> {
    let loaded = load_for_apply(args)?;
    let traces = attention_traces(&loaded.model, &loaded.encoded)?;
    write_attention_jsonl(output, &traces)?;
    if let Some(csv) = csv {
        write_attention_csv(csv, &traces)?;
    }
    writeln!(
        out,
        "wrote {} attention records to {}",
        traces.len(),
        output.display()
    )?;
    Ok(())
}

pub fn cmd_stats(
    dataset: &Path,
    embeddings: &Path,
    report: Option<&Path>,
    out: &mut dyn Write,
) -> Result<data::CorpusStats> {
    let tweets =
        parse_dataset(dataset).with_context(|| format!("reading {}", dataset.display()))?;
    let corpus = Corpus {
        tweets,
        tags: Vec::new(),
    };
    let store = load_store(embeddings, None, &[&corpus])?;
    let stats = corpus_stats(&corpus.tweets, &store)?;
    let name = dataset
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    write!(out, "{}", stats.to_table(&name))?;
    if let Some(path) = report {
        write_file(path, &stats.to_report())?;
    }
    Ok(stats)
}

/// What to featurize: a dataset file (optionally with POS tags) or raw text.
#[derive(Debug, Clone)]
pub enum FeaturizeInput {
    Dataset { path: PathBuf, pos: Option<PathBuf> },
    Text(String),
}

/// Prints `surface \t pos \t flags` per token, with a blank line between tweets.
pub fn cmd_featurize(input: &FeaturizeInput, out: &mut dyn Write) -> Result<()> {
    let (tweets, tags) = match input {
        FeaturizeInput::Dataset { path, pos } => {
            let c = load_corpus(path, pos.as_deref())?;
            (c.tweets, c.tags)
        }
        FeaturizeInput::Text(text) => {
            let t = Tweet {
                id: "text".into(),
                text: text.clone(),
                emotion: crate::data::Emotion::Joy,
                intensity: None,
            };
            (vec![t], Vec::new())
        }
    };
    for (i, t) in tweets.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
        }
        for (tok, pos, feats) in featurize_tweet(t, tags.get(i).map(Vec::as_slice))? {
            writeln!(out, "{}\t{}\t{}", tok.surface, pos, feats)?;
        }
    }
    Ok(())
}
