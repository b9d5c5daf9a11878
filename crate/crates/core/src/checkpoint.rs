//! Self-describing model checkpoints.
//!
//! A checkpoint is a JSON document holding the model configuration, every
//! parameter tensor by name and shape, and a fingerprint of the embedding
//! source. Floats are written in shortest round-trip form and parsed exactly,
//! so save/load reproduces every parameter bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embeddings::EmbeddingFingerprint;
use crate::error::{Error, Result};
use crate::model::{Model, ModelConfig, ModelParams};

pub const FORMAT: &str = "intensity-attn-checkpoint/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub config: ModelConfig,
    pub embeddings: EmbeddingFingerprint,
    pub tensors: Vec<NamedTensor>,
}

impl Checkpoint {
    pub fn from_model(model: &Model, embeddings: EmbeddingFingerprint) -> Self {
        let tensors = model
            .params
            .tensors()
            .into_iter()
            .map(|t| NamedTensor {
                name: t.name.to_string(),
                shape: t.shape,
                data: t.data.to_vec(),
            })
            .collect();
        Self {
            format: FORMAT.to_string(),
            config: model.config.clone(),
            embeddings,
            tensors,
        }
    }

    pub fn to_model(&self) -> Result<Model> {
        if self.format != FORMAT {
            return Err(Error::Checkpoint(format!(
                "unknown format {:?}",
                self.format
            )));
        }
        self.config.validate()?;
        let mut params = ModelParams::zeros(&self.config);
        let expected: Vec<(String, Vec<usize>)> = params
            .tensors()
            .into_iter()
            .map(|t| (t.name.to_string(), t.shape))
            .collect();
        if expected.len() != self.tensors.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} tensors, found {}",
                expected.len(),
                self.tensors.len()
            )));
        }
        for ((slot, (name, shape)), stored) in params
            .tensors_mut()
            .into_iter()
            .zip(&expected)
            .zip(&self.tensors)
        {
            if &stored.name != name || &stored.shape != shape || stored.data.len() != slot.len() {
                return Err(Error::Checkpoint(format!(
                    "tensor {} {:?} does not match expected {} {:?}",
                    stored.name, stored.shape, name, shape
                )));
            }
            slot.copy_from_slice(&stored.data);
        }
        if !params.is_finite() {
            return Err(Error::Checkpoint("non-finite parameter values".into()));
        }
        Model::from_parts(self.config.clone(), params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Checks that `other` describes the same embedding table (dimension and
    /// vocabulary size; the path may differ).
    pub fn check_embeddings(&self, other: &EmbeddingFingerprint) -> Result<()> {
        let ours = &self.embeddings;
        if ours.dim != other.dim || ours.vocab_size != other.vocab_size {
            return Err(Error::Checkpoint(format!(
                "embedding fingerprint mismatch: checkpoint has dim {} / {} entries ({}), got dim {} / {} entries ({})",
                ours.dim, ours.vocab_size, ours.path, other.dim, other.vocab_size, other.path
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fingerprint() -> EmbeddingFingerprint {
        EmbeddingFingerprint {
            path: "vectors.txt".into(),
            dim: 3,
            vocab_size: 10,
        }
    }

    fn model(bidirectional: bool) -> Model {
        Model::new(ModelConfig {
            embed_dim: 3,
            window_radius: 1,
            hidden_size: 4,
            bidirectional,
            feature_dim: 9,
            dropout_keep: 0.8,
            max_len: 50,
            seed: 11,
        })
        .unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        for bi in [false, true] {
            let m = model(bi);
            let ck = Checkpoint::from_model(&m, fingerprint());
            let back = Checkpoint::from_json(&ck.to_json()).unwrap();
            assert_eq!(back, ck);
            let restored = back.to_model().unwrap();
            for (a, b) in m.params.tensors().iter().zip(restored.params.tensors()) {
                let bits_a: Vec<u64> = a.data.iter().map(|v| v.to_bits()).collect();
                let bits_b: Vec<u64> = b.data.iter().map(|v| v.to_bits()).collect();
                assert_eq!(bits_a, bits_b, "{}", a.name);
            }
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut ck = Checkpoint::from_model(&model(true), fingerprint());
        ck.config.hidden_size = 5;
        assert!(ck.to_model().is_err());
    }

    #[test]
    fn garbage_is_rejected() {
        assert!(Checkpoint::from_json("{not json").is_err());
    }

    #[test]
    fn fingerprint_check() {
        let ck = Checkpoint::from_model(&model(true), fingerprint());
        let moved = EmbeddingFingerprint {
            path: "elsewhere.txt".into(),
            ..fingerprint()
        };
        assert!(ck.check_embeddings(&moved).is_ok());
        let other = EmbeddingFingerprint {
            dim: 4,
            ..fingerprint()
        };
        assert!(ck.check_embeddings(&other).is_err());
    }
}
