#![allow(dead_code)]

use num::{BigInt, BigRational, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use intensity_attn::model::ForwardTrace;
use intensity_attn::synthetic::{Signal, SyntheticTask};
use intensity_attn::{EncodedTweet, Encoder, Model, ModelConfig, ModelParams};

pub const EMBED_DIM: usize = 3;
pub const FEATURE_DIM: usize = 9;

pub fn small_config(radius: usize, bidirectional: bool, hidden: usize, seed: u64) -> ModelConfig {
    ModelConfig {
        embed_dim: EMBED_DIM,
        window_radius: radius,
        hidden_size: hidden,
        bidirectional,
        feature_dim: FEATURE_DIM,
        dropout_keep: 0.8,
        max_len: 50,
        seed,
    }
}

/// The 12 gradient-check configurations: radius {0,1,2} × uni/bi × hidden {4,8}.
pub fn grid_configs() -> Vec<ModelConfig> {
    let mut out = Vec::new();
    for radius in 0..=2 {
        for bi in [false, true] {
            for hidden in [4, 8] {
                out.push(small_config(radius, bi, hidden, 100 + out.len() as u64));
            }
        }
    }
    out
}

/// A tweet of `len` valid positions in buffers of `width >= len` rows; rows
/// past `len` hold random values.
pub fn random_tweet(
    rng: &mut impl Rng,
    cfg: &ModelConfig,
    len: usize,
    width: usize,
) -> EncodedTweet {
    assert!(width >= len);
    EncodedTweet {
        id: format!("r{}", rng.gen::<u32>()),
        tokens: (0..width).map(|i| format!("t{i}")).collect(),
        embeddings: (0..width)
            .map(|_| {
                (0..cfg.embed_dim)
                    .map(|_| rng.gen_range(-1.0..1.0))
                    .collect()
            })
            .collect(),
        features: (0..width)
            .map(|_| {
                (0..cfg.feature_dim)
                    .map(|_| if rng.gen_bool(0.3) { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect(),
        len,
        gold: Some(rng.gen()),
    }
}

/// Overwrites every buffer row at or past `from` with fresh random values.
pub fn scramble_padding(rng: &mut impl Rng, tweet: &mut EncodedTweet, from: usize) {
    for row in tweet.embeddings.iter_mut().skip(from) {
        for v in row.iter_mut() {
            *v = rng.gen_range(-1e3..1e3);
        }
    }
    for row in tweet.features.iter_mut().skip(from) {
        for v in row.iter_mut() {
            *v = rng.gen_range(-1e3..1e3);
        }
    }
}

/// Model with every parameter (biases included) drawn from [-0.5, 0.5].
pub fn random_model(cfg: &ModelConfig, rng: &mut impl Rng) -> Model {
    let mut params = ModelParams::zeros(cfg);
    for t in params.tensors_mut() {
        for v in t.iter_mut() {
            *v = rng.gen_range(-0.5..0.5);
        }
    }
    Model::from_parts(cfg.clone(), params).unwrap()
}

pub fn train_forward(
    model: &Model,
    batch: &[EncodedTweet],
    dropout_seed: u64,
) -> Vec<ForwardTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(dropout_seed);
    model.forward(batch, Some(&mut rng)).unwrap()
}

/// `Σ_b c_b ŷ_b` under a fixed dropout mask.
pub fn objective(
    model: &Model,
    batch: &[EncodedTweet],
    upstream: &[f64],
    dropout_seed: u64,
) -> f64 {
    train_forward(model, batch, dropout_seed)
        .iter()
        .zip(upstream)
        .map(|(t, c)| t.prediction * c)
        .sum()
}

pub const FD_STEP: f64 = 1e-5;
/// Denominator floor for relative errors: central differences at `FD_STEP`
/// carry roughly 1e-11 absolute round-off, which dominates tiny gradients.
pub const REL_FLOOR: f64 = 1e-6;

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

#[derive(Debug)]
pub struct GradCheck {
    pub max_rel_err: f64,
    pub worst: String,
    pub checked: usize,
}

/// Compares `backward` against central differences for every parameter on a
/// random 2-tweet batch in train mode.
pub fn grad_check(cfg: &ModelConfig, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = random_model(cfg, &mut rng);
    let batch: Vec<EncodedTweet> = (0..2)
        .map(|_| {
            let len = rng.gen_range(1..=6);
            random_tweet(&mut rng, cfg, len, len + 2)
        })
        .collect();
    let upstream: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let dropout_seed = rng.gen();

    let traces = train_forward(&model, &batch, dropout_seed);
    let grads = model.backward(&traces, &upstream).unwrap();
    let analytic: Vec<(&'static str, Vec<f64>)> = grads
        .tensors()
        .into_iter()
        .map(|t| (t.name, t.data.to_vec()))
        .collect();

    let mut probe = model.clone();
    let mut out = GradCheck {
        max_rel_err: 0.0,
        worst: String::new(),
        checked: 0,
    };
    for (ti, (name, grad)) in analytic.iter().enumerate() {
        for (k, &a) in grad.iter().enumerate() {
            let orig = probe.params.tensors_mut()[ti][k];
            probe.params.tensors_mut()[ti][k] = orig + FD_STEP;
            let plus = objective(&probe, &batch, &upstream, dropout_seed);
            probe.params.tensors_mut()[ti][k] = orig - FD_STEP;
            let minus = objective(&probe, &batch, &upstream, dropout_seed);
            probe.params.tensors_mut()[ti][k] = orig;
            let numeric = (plus - minus) / (2.0 * FD_STEP);
            let e = rel_err(a, numeric);
            out.checked += 1;
            if e > out.max_rel_err {
                out.max_rel_err = e;
                out.worst = format!("{name}[{k}] analytic {a:e} numeric {numeric:e}");
            }
        }
    }
    out
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite input")
}

/// Exact Pearson: all sums in rational arithmetic, one square root at the end.
/// Matches the library's guard by returning 0 for (near-)constant inputs.
pub fn pearson_exact(x: &[f64], y: &[f64]) -> f64 {
    let n = BigRational::from_integer(BigInt::from(x.len()));
    let xs: Vec<BigRational> = x.iter().map(|&v| rational(v)).collect();
    let ys: Vec<BigRational> = y.iter().map(|&v| rational(v)).collect();
    let mx = xs.iter().fold(BigRational::zero(), |a, b| a + b) / &n;
    let my = ys.iter().fold(BigRational::zero(), |a, b| a + b) / &n;
    let (mut sxy, mut sxx, mut syy) = (
        BigRational::zero(),
        BigRational::zero(),
        BigRational::zero(),
    );
    for (a, b) in xs.iter().zip(&ys) {
        let da = a - &mx;
        let db = b - &my;
        sxy += &da * &db;
        sxx += &da * &da;
        syy += &db * &db;
    }
    let guard = 1e-12;
    if (&sxx / &n).to_f64().unwrap() < guard || (&syy / &n).to_f64().unwrap() < guard {
        return 0.0;
    }
    let r2 = (&sxy * &sxy / (&sxx * &syy)).to_f64().unwrap();
    let r = r2.sqrt();
    if sxy.is_negative() {
        -r
    } else {
        r
    }
}

/// Average ranks by direct counting.
pub fn naive_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let below = x.iter().filter(|&&u| u < v).count() as f64;
            let equal = x.iter().filter(|&&u| u == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn spearman_exact(x: &[f64], y: &[f64]) -> f64 {
    pearson_exact(&naive_ranks(x), &naive_ranks(y))
}

/// Encoded train and dev sets for the elongation task.
pub fn elongation_sets(
    n_train: usize,
    n_dev: usize,
    embed_dim: usize,
    seed: u64,
) -> (Vec<EncodedTweet>, Vec<EncodedTweet>) {
    let task = SyntheticTask::new(24, embed_dim, seed);
    let enc = Encoder::new(task.store(), FEATURE_DIM);
    let train = task.tweets(n_train, Signal::Elongation, seed + 1, "train-");
    let dev = task.tweets(n_dev, Signal::Elongation, seed + 2, "dev-");
    (
        enc.encode_all(&train, &[]).unwrap(),
        enc.encode_all(&dev, &[]).unwrap(),
    )
}
