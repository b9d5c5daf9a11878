//! Trains briefly on the synthetic elongation task, exports per-token
//! attention weights as JSON lines and draws them as bars.

use std::env;
use std::path::PathBuf;

use intensity_attn::evaluation::export_attention;
use intensity_attn::synthetic::{Signal, SyntheticTask};
use intensity_attn::{train, Encoder, ModelConfig, TrainConfig};

pub fn run_example(output: PathBuf) -> intensity_attn::Result<()> {
    let task = SyntheticTask::new(24, 6, 8);
    let encoder = Encoder::new(task.store(), 9);
    let train_set = encoder.encode_all(&task.tweets(48, Signal::Elongation, 9, "t"), &[])?;
    let dev_set = encoder.encode_all(&task.tweets(16, Signal::Elongation, 10, "d"), &[])?;
    let model_config = ModelConfig {
        embed_dim: 6,
        hidden_size: 6,
        ..ModelConfig::default()
    };
    let train_config = TrainConfig {
        max_steps: 300,
        ..TrainConfig::default()
    };
    let outcome = train(&model_config, &train_config, &train_set, &dev_set)?;

    let traces = export_attention(&outcome.model, &dev_set, &output)?;
    println!("wrote {} records to {}", traces.len(), output.display());
    for t in traces.iter().take(3) {
        println!(
            "\n{}  gold {:.3}  predicted {:.3}",
            t.id,
            t.gold.unwrap_or(f64::NAN),
            t.prediction
        );
        for (tok, w) in t.tokens.iter().zip(&t.weights) {
            let bar = "#".repeat((w * 60.0).round() as usize);
            println!("  {tok:<10} {w:.3} {bar}");
        }
    }
    Ok(())
}

fn main() -> intensity_attn::Result<()> {
    let output = env::args()
        .nth(1)
        .map_or_else(|| env::temp_dir().join("attention.jsonl"), PathBuf::from);
    run_example(output)
}
