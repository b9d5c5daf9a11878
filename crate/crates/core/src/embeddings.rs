//! Pre-trained word vectors in whitespace-separated text format.
//!
//! Each line is a token followed by its components. A first line made of
//! exactly two integers (word2vec-style `count dim` header) is skipped.
//! Lookups lowercase the query and resolve misses to the all-zeros vector,
//! so every token maps to a `dim`-length vector.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dim: usize,
    table: HashMap<String, Vec<f64>>,
    oov: Vec<f64>,
    /// Valid entries in the source, counted before any vocabulary filter.
    source_entries: usize,
}

/// Identifies the embedding source a model was trained against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingFingerprint {
    pub path: String,
    pub dim: usize,
    pub vocab_size: usize,
}

impl EmbeddingStore {
    pub fn load(path: impl AsRef<Path>, expected_dim: Option<usize>) -> Result<Self> {
        Self::load_impl(path.as_ref(), expected_dim, None)
    }

    /// Like [`load`](Self::load) but keeps only tokens in `vocab`.
    pub fn load_filtered(
        path: impl AsRef<Path>,
        expected_dim: Option<usize>,
        vocab: &HashSet<String>,
    ) -> Result<Self> {
        Self::load_impl(path.as_ref(), expected_dim, Some(vocab))
    }

    fn load_impl(
        path: &Path,
        expected_dim: Option<usize>,
        vocab: Option<&HashSet<String>>,
    ) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(BufReader::new(file), expected_dim, vocab).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }

    pub fn from_reader(
        reader: impl BufRead,
        expected_dim: Option<usize>,
        vocab: Option<&HashSet<String>>,
    ) -> Result<Self> {
        let mut dim = expected_dim;
        let mut table = HashMap::new();
        let mut source_entries = 0;
        let mut seen = HashSet::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::io("<embeddings>", e))?;
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else {
                continue;
            };
            let rest: Vec<&str> = fields.collect();
            if idx == 0 && rest.len() == 1 && is_uint(token) && is_uint(rest[0]) {
                continue;
            }
            let d = *dim.get_or_insert(rest.len());
            if d == 0 {
                return Err(Error::EmbeddingFormat {
                    line: line_no,
                    message: "entry has no components".into(),
                });
            }
            if rest.len() != d {
                return Err(Error::EmbeddingFormat {
                    line: line_no,
                    message: format!("expected {d} components, found {}", rest.len()),
                });
            }
            if !seen.insert(token.to_string()) {
                continue;
            }
            source_entries += 1;
            if vocab.is_some_and(|v| !v.contains(token)) {
                continue;
            }
            let vector = rest
                .iter()
                .map(|s| match s.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(Error::EmbeddingFormat {
                        line: line_no,
                        message: format!("invalid component {s:?}"),
                    }),
                })
                .collect::<Result<Vec<_>>>()?;
            table.insert(token.to_string(), vector);
        }
        if source_entries == 0 {
            return Err(Error::EmbeddingFormat {
                line: 0,
                message: "no valid entries".into(),
            });
        }
        let dim = dim.unwrap_or(0);
        Ok(Self {
            dim,
            table,
            oov: vec![0.0; dim],
            source_entries,
        })
    }

    /// Builds a store from in-memory entries; first occurrence of a token wins.
    pub fn from_entries(entries: impl IntoIterator<Item = (String, Vec<f64>)>) -> Result<Self> {
        let mut dim = None;
        let mut table = HashMap::new();
        for (i, (token, vector)) in entries.into_iter().enumerate() {
            let d = *dim.get_or_insert(vector.len());
            if vector.len() != d || d == 0 || vector.iter().any(|v| !v.is_finite()) {
                return Err(Error::EmbeddingFormat {
                    line: i + 1,
                    message: format!("bad vector for {token:?}"),
                });
            }
            table.entry(token).or_insert(vector);
        }
        let dim = dim.ok_or_else(|| Error::EmbeddingFormat {
            line: 0,
            message: "no valid entries".into(),
        })?;
        let source_entries = table.len();
        Ok(Self {
            dim,
            table,
            oov: vec![0.0; dim],
            source_entries,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn source_entries(&self) -> usize {
        self.source_entries
    }

    pub fn oov_vector(&self) -> &[f64] {
        &self.oov
    }

    /// Exact match on the lowercased token.
    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.table.get(&token.to_lowercase()).map(Vec::as_slice)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.get(token).is_some()
    }

    pub fn lookup(&self, token: &str) -> &[f64] {
        self.get(token).unwrap_or(&self.oov)
    }

    pub fn fingerprint(&self, path: impl AsRef<Path>) -> EmbeddingFingerprint {
        EmbeddingFingerprint {
            path: path.as_ref().display().to_string(),
            dim: self.dim,
            vocab_size: self.source_entries,
        }
    }
}

fn is_uint(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}
