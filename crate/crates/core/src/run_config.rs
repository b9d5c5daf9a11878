//! Flat `key = value` run configuration.
//!
//! ```text
//! # anger, best dev configuration
//! emotion = anger
//! train = data/anger-train.tsv
//! dev = data/anger-dev.tsv
//! embeddings = glove.twitter.27B.50d.txt
//! out_dir = runs/anger
//! hidden_size = 100
//! dropout_keep = 0.5
//! lambda = 0.01
//! ```
//!
//! Relative paths in a file resolve against the file's directory. Overrides
//! given on the command line replace file values.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::data::Emotion;
use crate::error::{Error, Result};
use crate::features::FEATURE_DIM;
use crate::model::ModelConfig;
use crate::training::TrainConfig;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub emotion: Option<Emotion>,
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub train_pos: Option<PathBuf>,
    pub dev_pos: Option<PathBuf>,
    pub test_pos: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Expected embedding width; inferred from the file when absent.
    pub embed_dim: Option<usize>,
    pub model: ModelConfig,
    pub training: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            emotion: None,
            train: None,
            dev: None,
            test: None,
            train_pos: None,
            dev_pos: None,
            test_pos: None,
            embeddings: None,
            out_dir: PathBuf::from("out"),
            embed_dim: None,
            model: ModelConfig {
                seed: DEFAULT_SEED,
                ..ModelConfig::default()
            },
            training: TrainConfig {
                seed: DEFAULT_SEED,
                ..TrainConfig::default()
            },
        }
    }
}

pub const KEYS: &[&str] = &[
    "emotion",
    "train",
    "dev",
    "test",
    "train_pos",
    "dev_pos",
    "test_pos",
    "embeddings",
    "out_dir",
    "embed_dim",
    "window_radius",
    "hidden_size",
    "bidirectional",
    "use_features",
    "dropout_keep",
    "max_len",
    "seed",
    "batch_size",
    "lr0",
    "decay_ratio",
    "decay_every",
    "lambda",
    "patience_steps",
    "eval_every",
    "max_steps",
];

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "invalid boolean {value:?} for {key}"
        ))),
    }
}

impl RunConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: format!("expected `key = value`, got {line:?}"),
            })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("duplicate key {key}"),
                });
            }
            cfg.set_with_base(key, value.trim(), base)?;
        }
        Ok(cfg)
    }

    /// Applies a `key=value` override; relative paths are kept as given.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {assignment:?} is not key=value")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.set_with_base(key, value, Path::new(""))
    }

    fn set_with_base(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let path = || Some(base.join(value));
        match key {
            "emotion" => {
                self.emotion = Some(value.parse().map_err(Error::Config)?);
            }
            "train" => self.train = path(),
            "dev" => self.dev = path(),
            "test" => self.test = path(),
            "train_pos" => self.train_pos = path(),
            "dev_pos" => self.dev_pos = path(),
            "test_pos" => self.test_pos = path(),
            "embeddings" => self.embeddings = path(),
            "out_dir" => self.out_dir = base.join(value),
            "embed_dim" => self.embed_dim = Some(parse_value(key, value)?),
            "window_radius" => self.model.window_radius = parse_value(key, value)?,
            "hidden_size" => self.model.hidden_size = parse_value(key, value)?,
            "bidirectional" => self.model.bidirectional = parse_bool(key, value)?,
            "use_features" => {
                self.model.feature_dim = if parse_bool(key, value)? {
                    FEATURE_DIM
                } else {
                    0
                }
            }
            "dropout_keep" => self.model.dropout_keep = parse_value(key, value)?,
            "max_len" => self.model.max_len = parse_value(key, value)?,
            "seed" => self.set_seed(parse_value(key, value)?),
            "batch_size" => self.training.batch_size = parse_value(key, value)?,
            "lr0" => self.training.lr0 = parse_value(key, value)?,
            "decay_ratio" => self.training.decay_ratio = parse_value(key, value)?,
            "decay_every" => self.training.decay_every = parse_value(key, value)?,
            "lambda" => self.training.lambda = parse_value(key, value)?,
            "patience_steps" => self.training.patience_steps = parse_value(key, value)?,
            "eval_every" => self.training.eval_every = parse_value(key, value)?,
            "max_steps" => self.training.max_steps = parse_value(key, value)?,
            other => {
                return Err(Error::Config(format!(
                    "unknown key {other:?} (known keys: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// One seed drives initialization, shuffling and dropout.
    pub fn set_seed(&mut self, seed: u64) {
        self.model.seed = seed;
        self.training.seed = seed;
    }

    /// Checks required paths exist and hyperparameters are valid.
    pub fn validate_for_training(&self) -> Result<()> {
        for (name, p) in [
            ("train", &self.train),
            ("dev", &self.dev),
            ("embeddings", &self.embeddings),
        ] {
            match p {
                None => return Err(Error::Config(format!("missing required key {name}"))),
                Some(p) if !p.exists() => {
                    return Err(Error::Config(format!(
                        "{name} file {} does not exist",
                        p.display()
                    )))
                }
                _ => {}
            }
        }
        for (name, p) in [
            ("test", &self.test),
            ("train_pos", &self.train_pos),
            ("dev_pos", &self.dev_pos),
            ("test_pos", &self.test_pos),
        ] {
            if let Some(p) = p {
                if !p.exists() {
                    return Err(Error::Config(format!(
                        "{name} file {} does not exist",
                        p.display()
                    )));
                }
            }
        }
        let mut model = self.model.clone();
        model.embed_dim = self.embed_dim.unwrap_or(1);
        model.validate()?;
        self.training.validate()
    }
}
