//! Seeded synthetic corpora with a known intensity signal.
//!
//! Plain words come from a small vocabulary with random embeddings. Two
//! kinds of signal are available:
//!
//! - [`Signal::Elongation`]: intensity is the fraction of elongated tokens
//!   (`"soooo"`, `"yesss"`, ...). These tokens are out of vocabulary, so only
//!   the binary elongation flag carries the signal.
//! - [`Signal::Lexical`]: intensity is the fraction of "marked" vocabulary
//!   words, whose embeddings have a distinctive first component. The binary
//!   features carry nothing here.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{Emotion, Tweet};
use crate::embeddings::EmbeddingStore;
use crate::error::{Error, Result};

const ELONGATED: &[&str] = &[
    "soooo", "yesss", "nooooo", "whyyy", "ughhh", "loooove", "sooo", "omggg", "hmmm", "yaaay",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    Elongation,
    Lexical,
}

#[derive(Debug, Clone)]
pub struct SyntheticTask {
    words: Vec<String>,
    vectors: Vec<Vec<f64>>,
    n_marked: usize,
    store: EmbeddingStore,
}

impl SyntheticTask {
    /// A vocabulary of `vocab_size` words with `embed_dim`-wide vectors; the
    /// first quarter of the words are marked (first component +1, others −1).
    pub fn new(vocab_size: usize, embed_dim: usize, seed: u64) -> Self {
        assert!(vocab_size >= 4 && embed_dim >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_marked = vocab_size / 4;
        let words: Vec<String> = (0..vocab_size).map(|i| format!("w{i}")).collect();
        let vectors: Vec<Vec<f64>> = (0..vocab_size)
            .map(|i| {
                let mut v: Vec<f64> = (0..embed_dim).map(|_| rng.gen_range(-0.5..0.5)).collect();
                v[0] = if i < n_marked { 1.0 } else { -1.0 };
                v
            })
            .collect();
        let store =
            EmbeddingStore::from_entries(words.iter().cloned().zip(vectors.iter().cloned()))
                .expect("synthetic vectors are valid");
        Self {
            words,
            vectors,
            n_marked,
            store,
        }
    }

    pub fn store(&self) -> &EmbeddingStore {
        &self.store
    }

    /// Writes the vocabulary in the plain-text embedding format.
    pub fn write_embeddings(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for (word, v) in self.words.iter().zip(&self.vectors) {
            let comps: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{word} {}", comps.join(" ")).map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// `n` tweets of 4–12 tokens whose intensity is the fraction of signal tokens.
    pub fn tweets(&self, n: usize, signal: Signal, seed: u64, id_prefix: &str) -> Vec<Tweet> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plain = match signal {
            Signal::Elongation => &self.words[..],
            Signal::Lexical => &self.words[self.n_marked..],
        };
        (0..n)
            .map(|i| {
                let len = rng.gen_range(4..=12usize);
                let hits = rng.gen_range(0..=len);
                let mut tokens: Vec<&str> = (0..len)
                    .map(|k| {
                        if k < hits {
                            match signal {
                                Signal::Elongation => *ELONGATED.choose(&mut rng).unwrap(),
                                Signal::Lexical => {
                                    self.words[rng.gen_range(0..self.n_marked)].as_str()
                                }
                            }
                        } else {
                            plain.choose(&mut rng).unwrap().as_str()
                        }
                    })
                    .collect();
                tokens.shuffle(&mut rng);
                Tweet {
                    id: format!("{id_prefix}{i}"),
                    text: tokens.join(" "),
                    emotion: Emotion::Joy,
                    intensity: Some(hits as f64 / len as f64),
                }
            })
            .collect()
    }
}
