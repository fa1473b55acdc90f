use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn add(&mut self, other: &ConfusionCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.tn += other.tn;
        self.fn_ += other.fn_;
    }
}

/// Scores at or above `threshold` count as positive predictions.
pub fn confusion_at(scores: &[f64], labels: &[u8], threshold: f64) -> Result<ConfusionCounts> {
    if scores.is_empty() {
        return Err(Error::invalid("no scores to threshold"));
    }
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            context: "scores vs labels",
            expected: labels.len(),
            actual: scores.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (&s, &y) in scores.iter().zip(labels) {
        match (s >= threshold, y == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// Threshold metrics; a ratio with a zero denominator is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(c: &ConfusionCounts) -> MetricReport {
    MetricReport {
        sensitivity: ratio(c.tp, c.tp + c.fn_),
        specificity: ratio(c.tn, c.tn + c.fp),
        accuracy: ratio(c.tp + c.tn, c.total()),
        precision: ratio(c.tp, c.tp + c.fp),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_counts() {
        let c = ConfusionCounts {
            tp: 8,
            fn_: 2,
            tn: 9,
            fp: 1,
        };
        let m = metrics(&c);
        assert_eq!(m.sensitivity, Some(0.8));
        assert_eq!(m.specificity, Some(0.9));
        assert_eq!(m.accuracy, Some(0.85));
        assert!((m.precision.unwrap() - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn threshold_is_inclusive() {
        let c = confusion_at(&[0.5, 0.49, 0.9, 0.1], &[1, 1, 0, 0], 0.5).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                tp: 1,
                fn_: 1,
                fp: 1,
                tn: 1
            }
        );
        assert_eq!(c.total(), 4);
    }

    #[test]
    fn perfect_and_degenerate() {
        let m = metrics(&confusion_at(&[0.9, 0.1], &[1, 0], 0.5).unwrap());
        assert_eq!(
            (m.sensitivity, m.specificity, m.accuracy, m.precision),
            (Some(1.0), Some(1.0), Some(1.0), Some(1.0))
        );
        let m = metrics(&confusion_at(&[0.1, 0.2], &[1, 0], 0.5).unwrap());
        assert_eq!(m.precision, None);
        assert_eq!(m.specificity, Some(1.0));
        assert!(confusion_at(&[], &[], 0.5).is_err());
    }
}
