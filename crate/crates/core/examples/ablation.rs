//! Trains with and without the binary token features on two synthetic
//! corpora: one whose signal lives in the elongation flag, one whose signal
//! lives in the word embeddings.

use intensity_attn::evaluation::{ablation, AblationReport, Corpus};
use intensity_attn::synthetic::{Signal, SyntheticTask};
use intensity_attn::{ModelConfig, TrainConfig};

pub fn run_example() -> intensity_attn::Result<Vec<(Signal, AblationReport)>> {
    let task = SyntheticTask::new(40, 6, 12);
    let model_config = ModelConfig {
        embed_dim: 6,
        hidden_size: 6,
        ..ModelConfig::default()
    };
    let train_config = TrainConfig {
        max_steps: 400,
        patience_steps: 200,
        ..TrainConfig::default()
    };
    let mut reports = Vec::new();
    for signal in [Signal::Elongation, Signal::Lexical] {
        let corpus = |n, seed, prefix| Corpus {
            tweets: task.tweets(n, signal, seed, prefix),
            tags: Vec::new(),
        };
        let report = ablation(
            &model_config,
            &train_config,
            &corpus(64, 13, "t"),
            &corpus(32, 14, "d"),
            task.store(),
        )?;
        println!("{signal:?} signal");
        print!("{}", report.to_kv());
        reports.push((signal, report));
    }
    Ok(reports)
}

fn main() -> intensity_attn::Result<()> {
    run_example().map(|_| ())
}
