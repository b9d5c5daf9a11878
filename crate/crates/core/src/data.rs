//! Shared-task dataset files, POS-tag sidecars and corpus statistics.
//!
//! A dataset file holds one tweet per line as `id \t text \t emotion \t intensity`,
//! where the intensity column is either a real in `[0, 1]` or the sentinel `NONE`
//! for unlabeled test data. A POS sidecar holds `id \t tag tag tag ...` with one
//! single-character tag per token produced by [`tokenize`](crate::features::tokenize).

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embeddings::EmbeddingStore;
use crate::error::{Error, Result};
use crate::features::{tokenize, PLACEHOLDER_TAG};

/// Sentinel used in the intensity column of unlabeled files.
pub const NO_INTENSITY: &str = "NONE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Anger,
    Fear,
    Joy,
    Sadness,
}

impl Emotion {
    pub const ALL: [Emotion; 4] = [
        Emotion::Anger,
        Emotion::Fear,
        Emotion::Joy,
        Emotion::Sadness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Fear => "fear",
            Emotion::Joy => "joy",
            Emotion::Sadness => "sadness",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Emotion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "anger" => Ok(Emotion::Anger),
            "fear" => Ok(Emotion::Fear),
            "joy" => Ok(Emotion::Joy),
            "sadness" => Ok(Emotion::Sadness),
            other => Err(format!("unknown emotion {other:?}")),
        }
    }
}

/// One labeled (or unlabeled) instance of a dataset file.
#[derive(Debug, Clone, PartialEq)]
pub struct Tweet {
    pub id: String,
    pub text: String,
    pub emotion: Emotion,
    pub intensity: Option<f64>,
}

/// POS tags for one tweet, aligned 1:1 with its tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosTaggedTweet {
    pub id: String,
    pub tags: Vec<char>,
}

pub fn parse_dataset(path: impl AsRef<Path>) -> Result<Vec<Tweet>> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset_str(&content)
}

/// Parses dataset content. Blank lines are skipped, as is a leading `ID\t...`
/// header row when present.
pub fn parse_dataset_str(content: &str) -> Result<Vec<Tweet>> {
    let mut tweets = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in content.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        if idx == 0 && line.starts_with("ID\t") {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 4 tab-separated fields, found {}", fields.len()),
            });
        }
        let id = fields[0].trim();
        if id.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty id".into(),
            });
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate id {id:?}"),
            });
        }
        let emotion = fields[2]
            .parse::<Emotion>()
            .map_err(|message| Error::Parse {
                line: line_no,
                message,
            })?;
        let intensity = parse_intensity(fields[3].trim(), line_no)?;
        tweets.push(Tweet {
            id: id.to_string(),
            text: fields[1].to_string(),
            emotion,
            intensity,
        });
    }
    Ok(tweets)
}

fn parse_intensity(field: &str, line: usize) -> Result<Option<f64>> {
    if field == NO_INTENSITY {
        return Ok(None);
    }
    let value: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid intensity {field:?}"),
    })?;
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::IntensityRange { line, value });
    }
    Ok(Some(value))
}

/// Formats tweets in the 4-column layout accepted by [`parse_dataset_str`].
pub fn format_dataset(tweets: &[Tweet]) -> String {
    let mut out = String::new();
    for t in tweets {
        let intensity = match t.intensity {
            Some(v) => v.to_string(),
            None => NO_INTENSITY.to_string(),
        };
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            t.id, t.text, t.emotion, intensity
        ));
    }
    out
}

pub fn write_dataset(path: impl AsRef<Path>, tweets: &[Tweet]) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(format_dataset(tweets).as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn parse_pos_sidecar(path: impl AsRef<Path>) -> Result<Vec<PosTaggedTweet>> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pos_sidecar_str(&content)
}

pub fn parse_pos_sidecar_str(content: &str) -> Result<Vec<PosTaggedTweet>> {
    let mut out = Vec::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let (id, tags) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: idx + 1,
            message: "expected `id \\t tags`".into(),
        })?;
        let tags = tags
            .split_whitespace()
            .map(|tag| {
                let mut chars = tag.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => Ok(c),
                    _ => Err(Error::Parse {
                        line: idx + 1,
                        message: format!("POS tag {tag:?} is not a single character"),
                    }),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(PosTaggedTweet {
            id: id.trim().to_string(),
            tags,
        });
    }
    Ok(out)
}

/// Aligns sidecar tags to tweets by id, returning one tag sequence per tweet in
/// dataset order. Tweets missing from the sidecar receive placeholder tags.
pub fn align_pos_tags(tweets: &[Tweet], sidecar: &[PosTaggedTweet]) -> Result<Vec<Vec<char>>> {
    let index: HashMap<&str, usize> = tweets
        .iter()
        .enumerate()
        .map(|(i, t)| (t.id.as_str(), i))
        .collect();
    let mut aligned: Vec<Option<Vec<char>>> = vec![None; tweets.len()];
    for entry in sidecar {
        let &i = index
            .get(entry.id.as_str())
            .ok_or_else(|| Error::Alignment {
                id: entry.id.clone(),
                message: "id not present in the dataset".into(),
            })?;
        let n_tokens = tokenize(&tweets[i].text).len();
        if entry.tags.len() != n_tokens {
            return Err(Error::Alignment {
                id: entry.id.clone(),
                message: format!("{} tags for {} tokens", entry.tags.len(), n_tokens),
            });
        }
        aligned[i] = Some(entry.tags.clone());
    }
    Ok(aligned
        .into_iter()
        .zip(tweets)
        .map(|(tags, t)| tags.unwrap_or_else(|| placeholder_tags(&t.text)))
        .collect())
}

fn placeholder_tags(text: &str) -> Vec<char> {
    vec![PLACEHOLDER_TAG; tokenize(text).len()]
}

/// Loads and aligns POS tags for `tweets`. A missing sidecar (no path, or a
/// path that does not exist) tags every token with the placeholder.
pub fn load_pos_tags(path: Option<&Path>, tweets: &[Tweet]) -> Result<Vec<Vec<char>>> {
    match path {
        Some(p) if p.exists() => align_pos_tags(tweets, &parse_pos_sidecar(p)?),
        _ => Ok(tweets.iter().map(|t| placeholder_tags(&t.text)).collect()),
    }
}

/// Token-length summary of a corpus and its vocabulary coverage.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    pub n_tweets: usize,
    pub mean_len: f64,
    pub min_len: usize,
    pub max_len: usize,
    pub vocab_size: usize,
    pub covered: usize,
    pub coverage: f64,
}

impl CorpusStats {
    /// Flat `key = value` report.
    pub fn to_report(&self) -> String {
        format!(
            "n_tweets = {}\nmean_len = {}\nmin_len = {}\nmax_len = {}\nvocab_size = {}\ncovered = {}\ncoverage = {}\n",
            self.n_tweets,
            self.mean_len,
            self.min_len,
            self.max_len,
            self.vocab_size,
            self.covered,
            self.coverage
        )
    }

    pub fn to_table(&self, name: &str) -> String {
        format!(
            "{:<12} {:>8} {:>5} {:>5} {:>9}\n{:<12} {:>8.3} {:>5} {:>5} {:>8.1}%\n",
            "dataset",
            "mean",
            "min",
            "max",
            "coverage",
            name,
            self.mean_len,
            self.min_len,
            self.max_len,
            100.0 * self.coverage
        )
    }
}

/// Distinct lowercased token types of a corpus.
pub fn vocabulary(tweets: &[Tweet]) -> HashSet<String> {
    tweets
        .iter()
        .flat_map(|t| tokenize(&t.text))
        .map(|tok| tok.surface.to_lowercase())
        .collect()
}

pub fn corpus_stats(tweets: &[Tweet], store: &EmbeddingStore) -> Result<CorpusStats> {
    if tweets.is_empty() {
        return Err(Error::InvalidInput(
            "corpus statistics of an empty corpus".into(),
        ));
    }
    let lengths: Vec<usize> = tweets.iter().map(|t| tokenize(&t.text).len()).collect();
    let total: usize = lengths.iter().sum();
    let vocab = vocabulary(tweets);
    let covered = vocab.iter().filter(|w| store.contains(w)).count();
    let coverage = if vocab.is_empty() {
        0.0
    } else {
        covered as f64 / vocab.len() as f64
    };
    Ok(CorpusStats {
        n_tweets: tweets.len(),
        mean_len: total as f64 / tweets.len() as f64,
        min_len: lengths.iter().copied().min().unwrap_or(0),
        max_len: lengths.iter().copied().max().unwrap_or(0),
        vocab_size: vocab.len(),
        covered,
        coverage,
    })
}
