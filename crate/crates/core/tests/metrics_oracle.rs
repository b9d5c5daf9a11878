mod common;

use proptest::prelude::*;

use intensity_attn::evaluation::{score, SUBSET_THRESHOLD};
use intensity_attn::metrics::{average_ranks, pearson, spearman};

use common::{naive_ranks, pearson_exact, spearman_exact};

const TOL: f64 = 1e-10;

fn tied(levels: u32) -> impl Strategy<Value = f64> {
    (0..levels).prop_map(|v| v as f64 * 0.125)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pearson_matches_exact_arithmetic(
        xy in prop::collection::vec((-1e3f64..1e3, 0.0f64..1.0), 2..60),
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        prop_assert!((pearson(&x, &y).unwrap() - pearson_exact(&x, &y)).abs() <= TOL);
    }

    #[test]
    fn spearman_matches_exact_arithmetic_with_ties(
        xy in prop::collection::vec((tied(5), tied(4)), 2..60),
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        prop_assert_eq!(average_ranks(&x), naive_ranks(&x));
        prop_assert!((spearman(&x, &y).unwrap() - spearman_exact(&x, &y)).abs() <= TOL);
    }

    #[test]
    fn spearman_is_invariant_under_monotone_maps(
        x in prop::collection::vec(-5.0f64..5.0, 3..30),
        y in prop::collection::vec(-5.0f64..5.0, 3..30),
    ) {
        let n = x.len().min(y.len());
        let (x, y) = (&x[..n], &y[..n]);
        let mapped: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        prop_assert!((spearman(x, y).unwrap() - spearman(&mapped, y).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn pearson_is_symmetric_and_bounded(
        xy in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..40),
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        let r = pearson(&x, &y).unwrap();
        prop_assert!((-1.0..=1.0).contains(&r));
        prop_assert_eq!(r, pearson(&y, &x).unwrap());
    }

    #[test]
    fn subset_metrics_use_gold_at_or_above_threshold(
        pg in prop::collection::vec((0.0f64..1.0, tied(9)), 2..40),
    ) {
        let (pred, gold): (Vec<f64>, Vec<f64>) = pg.into_iter().unzip();
        let r = score(&pred, &gold).unwrap();
        let sub: Vec<(f64, f64)> = pred.iter().zip(&gold)
            .filter(|(_, g)| **g >= SUBSET_THRESHOLD)
            .map(|(p, g)| (*p, *g))
            .collect();
        prop_assert_eq!(r.n_ge05, sub.len());
        if sub.len() >= 2 {
            let (sp, sg): (Vec<f64>, Vec<f64>) = sub.into_iter().unzip();
            prop_assert!((r.pearson_ge05.unwrap() - pearson_exact(&sp, &sg)).abs() <= TOL);
            prop_assert!((r.spearman_ge05.unwrap() - spearman_exact(&sp, &sg)).abs() <= TOL);
        } else {
            prop_assert!(r.pearson_ge05.is_none());
        }
    }
}

#[test]
fn reference_values() {
    let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
    assert!((r - 0.8).abs() <= 1e-12);
    assert_eq!(pearson(&[1.0, 1.0, 1.0], &[0.1, 0.5, 0.9]).unwrap(), 0.0);
    assert_eq!(
        average_ranks(&[10.0, 20.0, 20.0, 30.0]),
        vec![1.0, 2.5, 2.5, 4.0]
    );
    assert!(pearson(&[1.0], &[1.0]).is_err());
    assert!(spearman(&[1.0, 2.0], &[1.0]).is_err());
}
