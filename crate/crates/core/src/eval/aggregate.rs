use serde::{Deserialize, Serialize};

use super::roc::RocCurve;
use super::stats::{mean, std_population, FiveNumber};
use crate::error::{Error, Result};

pub const FPR_GRID_POINTS: usize = 101;
pub const DEFAULT_BIN_WIDTH: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Mean and spread of one model's results over repeated splits. Standard
/// deviations use the population convention (divide by the run count).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunAggregate {
    pub model: String,
    pub runs: usize,
    pub aucs: Vec<f64>,
    pub auc_mean: f64,
    pub auc_std: f64,
    pub auc_summary: FiveNumber,
    pub fpr_grid: Vec<f64>,
    pub tpr_mean: Vec<f64>,
    pub tpr_std: Vec<f64>,
    pub bin_width: f64,
    pub histogram: Vec<HistogramBin>,
}

pub fn fpr_grid() -> Vec<f64> {
    (0..FPR_GRID_POINTS)
        .map(|k| k as f64 / (FPR_GRID_POINTS - 1) as f64)
        .collect()
}

pub fn auc_histogram(aucs: &[f64], bin_width: f64) -> Result<Vec<HistogramBin>> {
    if !(bin_width > 0.0 && bin_width <= 1.0) {
        return Err(Error::config(format!(
            "histogram bin width must lie in (0, 1], got {bin_width}"
        )));
    }
    let n_bins = ((1.0 / bin_width) - 1e-9).ceil() as usize;
    let mut bins: Vec<HistogramBin> = (0..n_bins)
        .map(|i| HistogramBin {
            lo: i as f64 * bin_width,
            hi: ((i + 1) as f64 * bin_width).min(1.0),
            count: 0,
        })
        .collect();
    for &a in aucs {
        let i = ((a / bin_width).floor().max(0.0) as usize).min(n_bins - 1);
        bins[i].count += 1;
    }
    Ok(bins)
}

pub fn aggregate_runs(
    model: impl Into<String>,
    curves: &[RocCurve],
    aucs: &[f64],
    bin_width: f64,
) -> Result<RunAggregate> {
    if curves.len() != aucs.len() {
        return Err(Error::Dimension {
            context: "curves vs AUCs",
            expected: aucs.len(),
            actual: curves.len(),
        });
    }
    if aucs.len() < 2 {
        return Err(Error::invalid("aggregation needs at least 2 runs"));
    }
    let grid = fpr_grid();
    let mut tpr_mean = Vec::with_capacity(grid.len());
    let mut tpr_std = Vec::with_capacity(grid.len());
    for &x in &grid {
        let at: Vec<f64> = curves.iter().map(|c| c.tpr_at(x)).collect();
        tpr_mean.push(mean(&at));
        tpr_std.push(std_population(&at));
    }
    Ok(RunAggregate {
        model: model.into(),
        runs: aucs.len(),
        aucs: aucs.to_vec(),
        auc_mean: mean(aucs),
        auc_std: std_population(aucs),
        auc_summary: FiveNumber::of(aucs),
        fpr_grid: grid,
        tpr_mean,
        tpr_std,
        bin_width,
        histogram: auc_histogram(aucs, bin_width)?,
    })
}
