//! Saves a trained model, reloads it and checks that predictions are
//! bit-identical; a checkpoint refuses embeddings of a different shape.

use std::env;

use intensity_attn::checkpoint::Checkpoint;
use intensity_attn::synthetic::{Signal, SyntheticTask};
use intensity_attn::{train, Encoder, ModelConfig, TrainConfig};

pub fn run_example() -> intensity_attn::Result<()> {
    let task = SyntheticTask::new(24, 6, 15);
    let encoder = Encoder::new(task.store(), 9);
    let train_set = encoder.encode_all(&task.tweets(32, Signal::Elongation, 16, "t"), &[])?;
    let dev_set = encoder.encode_all(&task.tweets(8, Signal::Elongation, 17, "d"), &[])?;
    let model_config = ModelConfig {
        embed_dim: 6,
        hidden_size: 4,
        ..ModelConfig::default()
    };
    let train_config = TrainConfig {
        max_steps: 100,
        ..TrainConfig::default()
    };
    let model = train(&model_config, &train_config, &train_set, &dev_set)?.model;

    let path = env::temp_dir().join(format!("intensity-checkpoint-{}.json", std::process::id()));
    Checkpoint::from_model(&model, task.store().fingerprint("vectors.txt")).save(&path)?;
    let loaded = Checkpoint::load(&path)?;
    let restored = loaded.to_model()?;
    let before = model.predict_batch(&dev_set)?;
    let after = restored.predict_batch(&dev_set)?;
    let identical = before
        .iter()
        .zip(&after)
        .all(|(a, b)| a.to_bits() == b.to_bits());
    println!(
        "{} tensors, {} parameters, predictions identical after reload: {identical}",
        loaded.tensors.len(),
        restored.params.num_params()
    );

    let other = SyntheticTask::new(30, 6, 15);
    match loaded.check_embeddings(&other.store().fingerprint("other.txt")) {
        Ok(()) => println!("unexpected: fingerprint accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    std::fs::remove_file(&path).ok();
    Ok(())
}

fn main() -> intensity_attn::Result<()> {
    run_example()
}
