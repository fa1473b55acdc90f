use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check(scores: &[f64], labels: &[u8]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            context: "scores vs labels",
            expected: labels.len(),
            actual: scores.len(),
        });
    }
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::invalid(format!("NaN score at position {i}")));
    }
    let pos = labels.iter().filter(|&&y| y == 1).count();
    let neg = labels.iter().filter(|&&y| y == 0).count();
    if pos + neg != labels.len() {
        return Err(Error::invalid("labels must be 0 or 1"));
    }
    if pos == 0 || neg == 0 {
        return Err(Error::invalid(
            "AUC needs at least one positive and one negative sample",
        ));
    }
    Ok((pos, neg))
}

/// Indices sorted by score, descending; ties keep input order.
fn order_desc(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    idx
}

/// Mann–Whitney AUC: the fraction of (positive, negative) pairs where the
/// positive scores higher, with ties counted one half.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (pos, neg) = check(scores, labels)?;
    let order = order_desc(scores);
    // walk tie groups from the top; each group's positives beat every
    // negative below it and split the ties within the group
    let mut negatives_below = neg as f64;
    let mut twice_correct = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let (mut p, mut n) = (0.0, 0.0);
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if labels[order[j]] == 1 {
                p += 1.0;
            } else {
                n += 1.0;
            }
            j += 1;
        }
        negatives_below -= n;
        twice_correct += p * (2.0 * negatives_below + n);
        i = j;
    }
    Ok(twice_correct / (2.0 * pos as f64 * neg as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Scores `>= threshold` are called positive. The first point uses `+inf`.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// Sorted by threshold, descending; starts at (0, 0), ends at (1, 1).
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    /// Trapezoidal area.
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
            .sum()
    }

    /// TPR at `fpr`, linear between operating points. On a vertical
    /// segment the highest TPR at that FPR is returned.
    pub fn tpr_at(&self, fpr: f64) -> f64 {
        let pts = &self.points;
        let mut best_at: Option<f64> = None;
        for p in pts {
            if p.fpr == fpr {
                best_at = Some(best_at.map_or(p.tpr, |b: f64| b.max(p.tpr)));
            }
        }
        if let Some(t) = best_at {
            return t;
        }
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.fpr < fpr && fpr < b.fpr {
                return a.tpr + (b.tpr - a.tpr) * (fpr - a.fpr) / (b.fpr - a.fpr);
            }
        }
        if fpr <= 0.0 {
            0.0
        } else {
            1.0
        }
    }
}

/// One operating point per distinct score, plus the `(0, 0)` origin.
pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<RocCurve> {
    let (pos, neg) = check(scores, labels)?;
    let order = order_desc(scores);
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold: t,
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
    }
    Ok(RocCurve { points })
}
