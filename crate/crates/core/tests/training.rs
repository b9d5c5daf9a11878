mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use intensity_attn::training::{dev_pearson, loss, loss_gradient, train, train_with_observer};
use intensity_attn::{Error, Model, ModelConfig, ModelParams, TrainConfig};

use common::*;

fn tiny_model() -> ModelConfig {
    ModelConfig {
        embed_dim: 6,
        hidden_size: 6,
        ..ModelConfig::default()
    }
}

fn quick(max_steps: usize) -> TrainConfig {
    TrainConfig {
        max_steps,
        eval_every: 10,
        patience_steps: 40,
        ..TrainConfig::default()
    }
}

fn param_bits(p: &ModelParams) -> Vec<u64> {
    p.tensors()
        .iter()
        .flat_map(|t| t.data.iter().map(|v| v.to_bits()))
        .collect()
}

#[test]
fn identical_seeds_give_identical_runs() {
    let (tr, dv) = elongation_sets(40, 16, 6, 1);
    let a = train(&tiny_model(), &quick(120), &tr, &dv).unwrap();
    let b = train(&tiny_model(), &quick(120), &tr, &dv).unwrap();
    assert_eq!(a.history, b.history);
    assert_eq!(a.history.to_tsv(), b.history.to_tsv());
    assert_eq!(param_bits(&a.model.params), param_bits(&b.model.params));

    let c = train(
        &tiny_model(),
        &TrainConfig {
            seed: 9,
            ..quick(120)
        },
        &tr,
        &dv,
    )
    .unwrap();
    assert_ne!(a.history, c.history);
}

#[test]
fn zero_steps_returns_initial_parameters() {
    let (tr, dv) = elongation_sets(8, 8, 6, 2);
    let out = train(&tiny_model(), &quick(0), &tr, &dv).unwrap();
    assert!(out.history.records.is_empty());
    assert_eq!(out.history.best_step, None);
    assert_eq!(out.history.best_val_pearson, None);
    assert_eq!(out.model.params, Model::new(tiny_model()).unwrap().params);
}

#[test]
fn best_checkpoint_reproduces_its_dev_pearson() {
    let (tr, dv) = elongation_sets(48, 24, 6, 3);
    let tc = TrainConfig {
        max_steps: 400,
        eval_every: 10,
        patience_steps: 60,
        lr0: 0.5,
        ..TrainConfig::default()
    };
    let out = train(&tiny_model(), &tc, &tr, &dv).unwrap();
    let best = out.history.best_val_pearson.unwrap();
    assert!((dev_pearson(&out.model, &dv).unwrap() - best).abs() <= 1e-10);
    let best_step = out.history.best_step.unwrap();
    let max_seen = out
        .history
        .records
        .iter()
        .map(|r| r.dev_pearson)
        .fold(f64::MIN, f64::max);
    assert_eq!(best, max_seen);
    let last = out.history.records.last().unwrap().step;
    assert!(last == tc.max_steps || last - best_step >= tc.patience_steps);
    assert!(out
        .history
        .records
        .iter()
        .all(|r| r.step <= best_step + tc.patience_steps));
}

#[test]
fn early_stopping_halts_before_max_steps_when_dev_stalls() {
    let (tr, mut dv) = elongation_sets(32, 16, 6, 4);
    // Dev gold unrelated to the signal, so improvements stall quickly.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for t in &mut dv {
        t.gold = Some(rng.gen());
    }
    let tc = TrainConfig {
        max_steps: 5000,
        eval_every: 10,
        patience_steps: 30,
        ..TrainConfig::default()
    };
    let out = train(&tiny_model(), &tc, &tr, &dv).unwrap();
    let last = out.history.records.last().unwrap().step;
    assert!(last < tc.max_steps);
    assert_eq!(last - out.history.best_step.unwrap(), tc.patience_steps);
}

#[test]
fn observer_sees_every_record_and_final_step_is_evaluated() {
    let (tr, dv) = elongation_sets(32, 8, 6, 5);
    let tc = TrainConfig {
        max_steps: 25,
        eval_every: 10,
        patience_steps: 100,
        ..TrainConfig::default()
    };
    let mut seen = Vec::new();
    let out = train_with_observer(&tiny_model(), &tc, &tr, &dv, |r| seen.push(r.clone())).unwrap();
    assert_eq!(seen, out.history.records);
    let steps: Vec<usize> = seen.iter().map(|r| r.step).collect();
    assert_eq!(steps, vec![10, 20, 25]);
    assert_eq!(seen[2].lr, tc.learning_rate(24));
}

#[test]
fn configuration_errors() {
    let (tr, mut dv) = elongation_sets(32, 8, 6, 6);
    let constant: Vec<_> = dv
        .iter()
        .cloned()
        .map(|mut t| {
            t.gold = Some(0.4);
            t
        })
        .collect();
    assert!(matches!(
        train(&tiny_model(), &quick(10), &tr, &constant),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        train(&tiny_model(), &quick(10), &tr[..8], &dv),
        Err(Error::Config(_))
    ));
    assert!(train(&tiny_model(), &quick(10), &tr, &[]).is_err());
    dv[0].gold = None;
    assert!(matches!(
        train(&tiny_model(), &quick(10), &tr, &dv),
        Err(Error::Config(_))
    ));
    let bad = TrainConfig {
        batch_size: 1,
        ..quick(10)
    };
    assert!(train(&tiny_model(), &bad, &tr, &dv).is_err());
}

#[test]
fn one_small_sgd_step_decreases_the_batch_loss() {
    for seed in 0..10 {
        let (tr, _) = elongation_sets(16, 2, 6, 10 + seed);
        let model = Model::new(ModelConfig {
            seed,
            ..tiny_model()
        })
        .unwrap();
        let gold: Vec<f64> = tr.iter().map(|t| t.gold.unwrap()).collect();
        let batch_loss = |m: &Model| {
            let pred = m.predict_batch(&tr).unwrap();
            loss(&pred, &gold, &m.params, 0.0).unwrap()
        };
        let traces = model.forward(&tr, None).unwrap();
        let pred: Vec<f64> = traces.iter().map(|t| t.prediction).collect();
        let grads = model
            .backward(&traces, &loss_gradient(&pred, &gold).unwrap())
            .unwrap();
        let before = batch_loss(&model);
        let decreased = [1e-3, 1e-4].iter().any(|&lr| {
            let mut m = model.clone();
            m.params.sgd_step(&grads, lr);
            batch_loss(&m) < before
        });
        assert!(decreased, "seed {seed}");
    }
}

proptest! {
    #[test]
    fn learning_rate_is_positive_and_non_increasing(
        lr0 in 1e-4f64..1.0,
        ratio in 0.5f64..=1.0,
        every in 1usize..500,
    ) {
        let tc = TrainConfig { lr0, decay_ratio: ratio, decay_every: every, ..TrainConfig::default() };
        let mut prev = f64::INFINITY;
        // At most 1000 decays keep lr0 · ratio^k inside the normal f64 range.
        for step in (0..every * 1000).step_by(every.div_ceil(3)) {
            let lr = tc.learning_rate(step);
            prop_assert!(lr > 0.0 && lr <= prev);
            prev = lr;
        }
        prop_assert_eq!(tc.learning_rate(every - 1), lr0);
        prop_assert_eq!(tc.learning_rate(every), lr0 * ratio);
    }

    #[test]
    fn l2_is_monotone_in_each_weight_magnitude(seed in any::<u64>(), scale in 1.0f64..5.0) {
        let cfg = small_config(1, true, 3, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = random_model(&cfg, &mut rng).params;
        let base = params.l2_norm_sq();
        let n = params.tensors().len();
        let mut grown = params.clone();
        let ti = rng.gen_range(0..n);
        let len = grown.tensors_mut()[ti].len();
        let k = rng.gen_range(0..len);
        grown.tensors_mut()[ti][k] *= scale;
        prop_assert!(grown.l2_norm_sq() >= base);
    }

    #[test]
    fn negative_pearson_is_affine_invariant(
        pred in prop::collection::vec(-3.0f64..3.0, 2..30),
        seed in any::<u64>(),
        a in 0.01f64..100.0,
        b in -50.0f64..50.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gold: Vec<f64> = pred.iter().map(|_| rng.gen()).collect();
        let params = ModelParams::zeros(&small_config(0, false, 1, 0));
        let base = loss(&pred, &gold, &params, 0.0).unwrap();
        prop_assume!(base.abs() > 1e-9);
        let up: Vec<f64> = pred.iter().map(|p| a * p + b).collect();
        let down: Vec<f64> = pred.iter().map(|p| -a * p + b).collect();
        let l_up = loss(&up, &gold, &params, 0.0).unwrap();
        let l_down = loss(&down, &gold, &params, 0.0).unwrap();
        prop_assert_eq!(l_up.signum(), base.signum());
        prop_assert_eq!(l_down.signum(), -base.signum());
        prop_assert!((l_up - base).abs() <= 1e-12);
        prop_assert!((l_down + base).abs() <= 1e-12);
    }

    #[test]
    fn loss_gradient_is_zero_for_constant_inputs_and_at_the_optimum(
        gold in prop::collection::vec(0.0f64..1.0, 2..20),
        c in -1.0f64..1.0,
    ) {
        let flat = vec![c; gold.len()];
        prop_assert!(loss_gradient(&flat, &gold).unwrap().iter().all(|&g| g == 0.0));
        prop_assert!(loss_gradient(&gold, &flat).unwrap().iter().all(|&g| g == 0.0));
        if let Ok(g) = loss_gradient(&gold, &gold) {
            prop_assert!(g.iter().all(|v| v.abs() <= 1e-9));
        }
    }
}
