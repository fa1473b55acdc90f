//! Paired DeLong test for two correlated AUCs on the same samples.
//!
//! Structural components are computed from midranks in O(n log n):
//! for a positive `i`, `V10_i` is the fraction of negatives it outscores
//! (ties one half); for a negative `j`, `V01_j` is the fraction of positives
//! scoring above it.

use serde::{Deserialize, Serialize};

use super::roc::auc;
use super::stats::{mean, two_sided_p};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelongResult {
    pub auc_a: f64,
    pub auc_b: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub covariance: f64,
    /// Variance of `auc_a - auc_b`.
    pub variance_diff: f64,
    pub z: f64,
    /// Two-sided normal p-value.
    pub p: f64,
}

/// Structural components `(V10 over positives, V01 over negatives)`, each in
/// input order of the respective class.
pub fn structural_components(scores: &[f64], labels: &[u8]) -> Result<(Vec<f64>, Vec<f64>)> {
    auc(scores, labels)?; // shape and class checks
    let pos: Vec<f64> = scores
        .iter()
        .zip(labels)
        .filter(|(_, &y)| y == 1)
        .map(|(&s, _)| s)
        .collect();
    let neg: Vec<f64> = scores
        .iter()
        .zip(labels)
        .filter(|(_, &y)| y == 0)
        .map(|(&s, _)| s)
        .collect();
    let (m, n) = (pos.len(), neg.len());
    let all: Vec<f64> = pos.iter().chain(&neg).copied().collect();
    let tx = midranks(&pos);
    let ty = midranks(&neg);
    let tz = midranks(&all);
    let v10 = (0..m).map(|i| (tz[i] - tx[i]) / n as f64).collect();
    let v01 = (0..n)
        .map(|j| 1.0 - (tz[m + j] - ty[j]) / m as f64)
        .collect();
    Ok((v10, v01))
}

/// 1-based ranks with ties sharing their average rank.
fn midranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Sample covariance (n - 1 denominator); zero for fewer than two values.
fn covariance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() < 2 {
        return 0.0;
    }
    let (ma, mb) = (mean(a), mean(b));
    let s: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    super::stats::sum(&s) / (a.len() - 1) as f64
}

pub fn delong_test(scores_a: &[f64], scores_b: &[f64], labels: &[u8]) -> Result<DelongResult> {
    if scores_a.len() != scores_b.len() {
        return Err(Error::Dimension {
            context: "paired score vectors",
            expected: scores_a.len(),
            actual: scores_b.len(),
        });
    }
    let auc_a = auc(scores_a, labels)?;
    let auc_b = auc(scores_b, labels)?;
    let (a10, a01) = structural_components(scores_a, labels)?;
    let (b10, b01) = structural_components(scores_b, labels)?;
    let (m, n) = (a10.len() as f64, a01.len() as f64);

    let var_a = covariance(&a10, &a10) / m + covariance(&a01, &a01) / n;
    let var_b = covariance(&b10, &b10) / m + covariance(&b01, &b01) / n;
    let cov = covariance(&a10, &b10) / m + covariance(&a01, &b01) / n;
    // variance of the difference from the differenced components, which is
    // exactly zero for identical inputs and never negative
    let d10: Vec<f64> = a10.iter().zip(&b10).map(|(x, y)| x - y).collect();
    let d01: Vec<f64> = a01.iter().zip(&b01).map(|(x, y)| x - y).collect();
    let variance_diff = covariance(&d10, &d10) / m + covariance(&d01, &d01) / n;

    let diff = auc_a - auc_b;
    let z = if variance_diff > 0.0 {
        diff / variance_diff.sqrt()
    } else if diff == 0.0 {
        0.0
    } else {
        return Err(Error::Degenerate(format!(
            "AUCs differ ({auc_a} vs {auc_b}) but the variance of their difference is zero"
        )));
    };
    Ok(DelongResult {
        auc_a,
        auc_b,
        var_a,
        var_b,
        covariance: cov,
        variance_diff,
        z,
        p: two_sided_p(z),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_inputs_give_zero_z() {
        let s = [0.1, 0.4, 0.35, 0.8, 0.5, 0.5];
        let y = [0, 0, 1, 1, 1, 0];
        let r = delong_test(&s, &s, &y).unwrap();
        assert_eq!(r.z, 0.0);
        assert_eq!(r.p, 1.0);
        assert_eq!(r.variance_diff, 0.0);
    }

    #[test]
    fn midranks_average_ties() {
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn components_average_to_auc() {
        let s = [0.1, 0.4, 0.35, 0.8, 0.5, 0.5, 0.2];
        let y = [0, 0, 1, 1, 1, 0, 1];
        let (v10, v01) = structural_components(&s, &y).unwrap();
        let a = auc(&s, &y).unwrap();
        assert!((mean(&v10) - a).abs() < 1e-15);
        assert!((mean(&v01) - a).abs() < 1e-15);
    }

    #[test]
    fn zero_variance_with_different_aucs_is_degenerate() {
        // one positive, one negative: no spread in components
        let y = [1, 0];
        let err = delong_test(&[0.9, 0.1], &[0.1, 0.9], &y).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }

    #[test]
    fn better_classifier_gets_positive_z() {
        let y = [1, 1, 1, 1, 0, 0, 0, 0, 1, 0];
        let good = [0.9, 0.8, 0.7, 0.85, 0.1, 0.2, 0.3, 0.25, 0.6, 0.4];
        let weak = [0.5, 0.2, 0.7, 0.3, 0.4, 0.6, 0.1, 0.8, 0.45, 0.35];
        let r = delong_test(&good, &weak, &y).unwrap();
        assert!(r.z > 0.0 && r.p < 0.5);
        assert!((r.p - 2.0 * (1.0 - super::super::stats::normal_cdf(r.z.abs()))).abs() < 1e-12);
    }
}
