//! Turns tweets into model inputs: embeddings plus binary features.

use crate::data::Tweet;
use crate::embeddings::EmbeddingStore;
use crate::error::{Error, Result};
use crate::features::featurize_tweet;
use crate::model::EncodedTweet;

#[derive(Debug, Clone, Copy)]
pub struct Encoder<'a> {
    store: &'a EmbeddingStore,
    feature_dim: usize,
}

impl<'a> Encoder<'a> {
    /// `feature_dim` selects how many leading flags are kept (9 for all, 0 for none).
    pub fn new(store: &'a EmbeddingStore, feature_dim: usize) -> Self {
        Self { store, feature_dim }
    }

    pub fn encode(&self, tweet: &Tweet, tags: Option<&[char]>) -> Result<EncodedTweet> {
        let featurized = featurize_tweet(tweet, tags)?;
        let mut tokens = Vec::with_capacity(featurized.len());
        let mut embeddings = Vec::with_capacity(featurized.len());
        let mut features = Vec::with_capacity(featurized.len());
        for (tok, _, feats) in featurized {
            embeddings.push(self.store.lookup(&tok.surface).to_vec());
            let mut f = feats.to_vec();
            f.truncate(self.feature_dim);
            features.push(f);
            tokens.push(tok.surface);
        }
        Ok(EncodedTweet {
            id: tweet.id.clone(),
            len: tokens.len(),
            tokens,
            embeddings,
            features,
            gold: tweet.intensity,
        })
    }

    /// Encodes a dataset; `tags` is either empty (no POS information) or
    /// aligned 1:1 with `tweets`.
    pub fn encode_all(&self, tweets: &[Tweet], tags: &[Vec<char>]) -> Result<Vec<EncodedTweet>> {
        if !tags.is_empty() && tags.len() != tweets.len() {
            return Err(Error::InvalidInput(format!(
                "{} tag sequences for {} tweets",
                tags.len(),
                tweets.len()
            )));
        }
        tweets
            .iter()
            .enumerate()
            .map(|(i, t)| self.encode(t, tags.get(i).map(Vec::as_slice)))
            .collect()
    }
}

impl EncodedTweet {
    /// Zero-pads the input buffers to `width` positions.
    pub fn padded(mut self, width: usize) -> Self {
        if let (Some(e), Some(f)) = (self.embeddings.first(), self.features.first()) {
            let (ed, fd) = (e.len(), f.len());
            if self.embeddings.len() < width {
                self.embeddings.resize(width, vec![0.0; ed]);
                self.features.resize(width, vec![0.0; fd]);
            }
        }
        self
    }
}
