//! Emotion-intensity regression for tweets.
//!
//! A tweet is tokenized, each token is mapped to a frozen word vector and a
//! 9-flag binary feature vector, and a context-windowed (Bi)LSTM runs over the
//! windows of neighbouring embeddings. Each hidden state is concatenated with
//! its token's flags, attention against the last valid state pools the
//! sequence into a sentence vector, and a linear head predicts the intensity.
//! Training minimises the negative mini-batch Pearson correlation plus an L2
//! penalty with plain SGD, exponential learning-rate decay and early stopping.
//!
//! The `examples/` directory has one runnable program per capability; the
//! `intensity` binary wires everything into reproducible command-line runs.

pub mod checkpoint;
pub mod cli;
pub mod data;
pub mod embeddings;
pub mod encode;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod metrics;
pub mod model;
pub mod run_config;
pub mod synthetic;
pub mod training;

pub use data::{Emotion, Tweet};
pub use embeddings::EmbeddingStore;
pub use encode::Encoder;
pub use error::{Error, Result};
pub use evaluation::{evaluate, EvalReport};
pub use model::{EncodedTweet, Model, ModelConfig, ModelParams};
pub use training::{train, TrainConfig, TrainHistory};
