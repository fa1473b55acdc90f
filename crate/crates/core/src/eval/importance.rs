//! Permutation feature importance: how much test AUC drops when one input
//! column is shuffled across rows.

use rand::seq::SliceRandom;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::roc::auc;
use super::stats::{mean, std_population};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Scores rows of a dense matrix.
pub type ScoreFn<'a> = dyn Fn(&Matrix) -> Result<Vec<f64>> + 'a;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    /// Column within the scored matrix.
    pub column: usize,
    pub name: String,
    pub mean_drop: f64,
    pub std_drop: f64,
    /// The column had a single value, so permuting it is a no-op.
    pub constant: bool,
    /// 1 = largest mean drop.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub baseline_auc: f64,
    pub repeats: usize,
    /// In column order.
    pub features: Vec<FeatureImportance>,
}

impl ImportanceReport {
    /// Features sorted by rank, truncated to `k`.
    pub fn top(&self, k: usize) -> Vec<&FeatureImportance> {
        let mut v: Vec<&FeatureImportance> = self.features.iter().collect();
        v.sort_by_key(|f| f.rank);
        v.truncate(k);
        v
    }
}

/// Per-repeat AUC drops for one column, with the row permutation supplied by
/// `shuffle`.
pub fn permutation_drops_with(
    score: &ScoreFn<'_>,
    x: &Matrix,
    labels: &[u8],
    column: usize,
    repeats: usize,
    shuffle: &mut dyn FnMut(&mut [usize]),
) -> Result<(Vec<f64>, bool)> {
    if repeats == 0 {
        return Err(Error::config("permutation repeats must be >= 1"));
    }
    if column >= x.cols() {
        return Err(Error::invalid(format!("column {column} out of range")));
    }
    let baseline = auc(&score(x)?, labels)?;
    let values = x.column(column);
    let constant = values.iter().all(|v| v.to_bits() == values[0].to_bits());
    if constant {
        return Ok((vec![0.0; repeats], true));
    }
    let mut drops = Vec::with_capacity(repeats);
    let mut perm: Vec<usize> = (0..x.rows()).collect();
    let mut shuffled = x.clone();
    for _ in 0..repeats {
        perm.iter_mut().enumerate().for_each(|(i, p)| *p = i);
        shuffle(&mut perm);
        for (r, &src) in perm.iter().enumerate() {
            shuffled.set(r, column, values[src]);
        }
        drops.push(baseline - auc(&score(&shuffled)?, labels)?);
    }
    Ok((drops, false))
}

/// Mean AUC drop over `repeats` random permutations of one column.
pub fn permutation_importance(
    score: &ScoreFn<'_>,
    x: &Matrix,
    labels: &[u8],
    column: usize,
    repeats: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    let (drops, _) =
        permutation_drops_with(score, x, labels, column, repeats, &mut |p| p.shuffle(rng))?;
    Ok(mean(&drops))
}

/// Importance of every column, ranked.
pub fn importance_report(
    score: &ScoreFn<'_>,
    x: &Matrix,
    labels: &[u8],
    names: &[String],
    repeats: usize,
    rng: &mut dyn RngCore,
) -> Result<ImportanceReport> {
    if names.len() != x.cols() {
        return Err(Error::Dimension {
            context: "feature names vs columns",
            expected: x.cols(),
            actual: names.len(),
        });
    }
    let baseline_auc = auc(&score(x)?, labels)?;
    let mut features = Vec::with_capacity(x.cols());
    for (c, name) in names.iter().enumerate() {
        let (drops, constant) =
            permutation_drops_with(score, x, labels, c, repeats, &mut |p| p.shuffle(rng))?;
        features.push(FeatureImportance {
            column: c,
            name: name.clone(),
            mean_drop: mean(&drops),
            std_drop: std_population(&drops),
            constant,
            rank: 0,
        });
    }
    let mut order: Vec<usize> = (0..features.len()).collect();
    order.sort_by(|&a, &b| {
        features[b]
            .mean_drop
            .total_cmp(&features[a].mean_drop)
            .then(a.cmp(&b))
    });
    for (rank, &i) in order.iter().enumerate() {
        features[i].rank = rank + 1;
    }
    Ok(ImportanceReport {
        baseline_auc,
        repeats,
        features,
    })
}
