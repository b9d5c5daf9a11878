//! Trains on a synthetic corpus whose intensity is the fraction of elongated
//! tokens, printing the evaluation history and final dev metrics.
//!
//! ```text
//! cargo run --release --example train_synthetic -- [lr0] [seed]
//! ```

use std::env;
use std::time::Instant;

use intensity_attn::synthetic::{Signal, SyntheticTask};
use intensity_attn::training::{train_with_observer, TrainOutcome};
use intensity_attn::{evaluate, Encoder, ModelConfig, TrainConfig, TrainHistory};

pub fn run_example(lr0: f64, seed: u64) -> intensity_attn::Result<TrainOutcome> {
    let task = SyntheticTask::new(24, 8, seed);
    let encoder = Encoder::new(task.store(), 9);
    let train_set = encoder.encode_all(
        &task.tweets(32, Signal::Elongation, seed + 1, "train-"),
        &[],
    )?;
    let dev_set =
        encoder.encode_all(&task.tweets(32, Signal::Elongation, seed + 2, "dev-"), &[])?;

    let model_config = ModelConfig {
        embed_dim: 8,
        hidden_size: 8,
        seed,
        ..ModelConfig::default()
    };
    let train_config = TrainConfig {
        lr0,
        max_steps: 2000,
        seed,
        ..TrainConfig::default()
    };

    let start = Instant::now();
    println!("{}", TrainHistory::HEADER);
    let outcome = train_with_observer(&model_config, &train_config, &train_set, &dev_set, |r| {
        println!("{}", r.to_line())
    })?;
    println!(
        "best step {:?}, dev pearson {:?} ({:.1?})",
        outcome.history.best_step,
        outcome.history.best_val_pearson,
        start.elapsed()
    );
    print!("{}", evaluate(&outcome.model, &dev_set)?.to_kv());
    Ok(outcome)
}

fn main() -> intensity_attn::Result<()> {
    let args: Vec<String> = env::args().skip(1).collect();
    let lr0 = args
        .first()
        .map_or(0.1, |s| s.parse().expect("lr0 must be a number"));
    let seed = args
        .get(1)
        .map_or(42, |s| s.parse().expect("seed must be an integer"));
    run_example(lr0, seed).map(|_| ())
}
