//! Correlation coefficients used for the loss and for reporting.

use crate::error::{Error, Result};

/// Population variance below which a vector counts as constant.
pub const VARIANCE_GUARD: f64 = 1e-12;

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "correlation of vectors with lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "correlation needs at least 2 points, got {}",
            x.len()
        )));
    }
    Ok(())
}

pub(crate) fn centered(x: &[f64]) -> Vec<f64> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - mean).collect()
}

/// Centered copies and squared norms of both vectors, or `None` when either
/// one is (numerically) constant.
pub(crate) fn centered_pair(x: &[f64], y: &[f64]) -> Option<(Vec<f64>, Vec<f64>, f64, f64)> {
    let n = x.len() as f64;
    let xc = centered(x);
    let yc = centered(y);
    let sxx: f64 = xc.iter().map(|v| v * v).sum();
    let syy: f64 = yc.iter().map(|v| v * v).sum();
    if sxx / n < VARIANCE_GUARD || syy / n < VARIANCE_GUARD {
        return None;
    }
    Some((xc, yc, sxx, syy))
}

/// Sample Pearson correlation. Returns 0 when either input is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let Some((xc, yc, sxx, syy)) = centered_pair(x, y) else {
        return Ok(0.0);
    };
    let sxy: f64 = xc.iter().zip(&yc).map(|(a, b)| a * b).sum();
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && x[order[j]] == x[order[i]] {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

/// Spearman rank correlation: Pearson of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_examples() {
        let v = [0.1, 0.5, 0.9];
        assert!((pearson(&v, &v).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-15);
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[0.4, 0.4, 0.4]).unwrap(), 0.0);
    }

    #[test]
    fn pearson_errors() {
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[1.0, 1.0, 2.0]), vec![1.5, 1.5, 3.0]);
        assert_eq!(
            average_ranks(&[3.0, 1.0, 3.0, 3.0]),
            vec![3.0, 1.0, 3.0, 3.0]
        );
        assert_eq!(average_ranks(&[0.2, 0.1]), vec![2.0, 1.0]);
    }

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| v.powi(3) + 2.0).collect();
        assert!((spearman(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        let r = spearman(&[1.0, 2.0, 3.0], &[1.0, 1.0, 2.0]).unwrap();
        assert!((r - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((spearman(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!(spearman(&[1.0], &[1.0]).is_err());
    }
}
