//! Compares analytic parameter gradients with central finite differences on a
//! small BiLSTM-attention model and prints the worst relative error per tensor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use intensity_attn::{EncodedTweet, Model, ModelConfig};

fn objective(model: &Model, batch: &[EncodedTweet], upstream: &[f64]) -> f64 {
    // Re-seeding keeps the dropout mask fixed across evaluations.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let traces = model.forward(batch, Some(&mut rng)).unwrap();
    traces
        .iter()
        .zip(upstream)
        .map(|(t, c)| t.prediction * c)
        .sum()
}

pub fn run_example() -> intensity_attn::Result<f64> {
    let config = ModelConfig {
        embed_dim: 4,
        window_radius: 1,
        hidden_size: 5,
        ..ModelConfig::default()
    };
    let model = Model::new(config.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let batch: Vec<EncodedTweet> = [4, 7]
        .iter()
        .enumerate()
        .map(|(b, &len)| EncodedTweet {
            id: format!("t{b}"),
            tokens: vec![String::new(); len],
            embeddings: (0..len)
                .map(|_| {
                    (0..config.embed_dim)
                        .map(|_| rng.gen_range(-1.0..1.0))
                        .collect()
                })
                .collect(),
            features: (0..len)
                .map(|_| {
                    (0..config.feature_dim)
                        .map(|_| f64::from(rng.gen_range(0..2)))
                        .collect()
                })
                .collect(),
            len,
            gold: None,
        })
        .collect();
    let upstream = [0.8, -0.5];

    let mut drop_rng = ChaCha8Rng::seed_from_u64(99);
    let traces = model.forward(&batch, Some(&mut drop_rng))?;
    let grads = model.backward(&traces, &upstream)?;

    let h = 1e-5;
    let mut probe = model.clone();
    let mut worst_overall: f64 = 0.0;
    for (ti, tensor) in grads.tensors().iter().enumerate() {
        let mut worst: f64 = 0.0;
        for (k, &analytic) in tensor.data.iter().enumerate() {
            let orig = probe.params.tensors_mut()[ti][k];
            probe.params.tensors_mut()[ti][k] = orig + h;
            let plus = objective(&probe, &batch, &upstream);
            probe.params.tensors_mut()[ti][k] = orig - h;
            let minus = objective(&probe, &batch, &upstream);
            probe.params.tensors_mut()[ti][k] = orig;
            let numeric = (plus - minus) / (2.0 * h);
            let err = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(err);
        }
        println!(
            "{:<18} {:>5} params  max rel err {worst:.2e}",
            tensor.name,
            tensor.data.len()
        );
        worst_overall = worst_overall.max(worst);
    }
    Ok(worst_overall)
}

fn main() -> intensity_attn::Result<()> {
    let worst = run_example()?;
    println!("worst {worst:.2e}");
    Ok(())
}
