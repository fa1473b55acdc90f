use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::GappedDataset;
use crate::error::{Error, Result};
use crate::rng::stream;

/// Disjoint train/test row sets (0-based, ascending).
///
/// Test rows are drawn from the complete rows only; every other row, complete
/// or not, belongs to the training side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSplit {
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub seed: u64,
}

impl DataSplit {
    pub fn is_test(&self, row: usize) -> bool {
        self.test_rows.binary_search(&row).is_ok()
    }

    /// `rows` minus the test rows, order preserved.
    pub fn exclude_test(&self, rows: &[usize]) -> Vec<usize> {
        rows.iter().copied().filter(|&r| !self.is_test(r)).collect()
    }
}

/// Number of test rows drawn from `n_complete` complete rows.
pub fn test_count(n_complete: usize, test_fraction: f64) -> usize {
    let t = (test_fraction * n_complete as f64).round() as usize;
    t.clamp(1, n_complete.saturating_sub(1).max(1))
}

pub fn split(
    ds: &GappedDataset,
    test_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<DataSplit> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::config(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let complete = ds.complete_rows();
    if complete.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 complete rows to hold out a test set, found {}",
            complete.len()
        )));
    }
    let total = test_count(complete.len(), test_fraction);
    let mut rng = stream(seed);

    let mut test_rows: Vec<usize> = if stratified {
        let (pos, neg): (Vec<usize>, Vec<usize>) =
            complete.iter().partition(|&&r| ds.label(r) == 1);
        if pos.is_empty() || neg.is_empty() || total < 2 {
            return Err(Error::invalid(format!(
                "stratified split needs both classes among complete rows and at least 2 test rows \
                 (complete positives {}, negatives {}, test rows {total})",
                pos.len(),
                neg.len()
            )));
        }
        let ideal = total as f64 * pos.len() as f64 / complete.len() as f64;
        let mut n_pos = (ideal.round() as usize).clamp(1, total - 1).min(pos.len());
        let mut n_neg = total - n_pos;
        if n_neg > neg.len() {
            n_neg = neg.len();
            n_pos = total - n_neg;
        }
        let mut chosen: Vec<usize> = sample(&mut rng, pos.len(), n_pos)
            .into_iter()
            .map(|i| pos[i])
            .collect();
        chosen.extend(
            sample(&mut rng, neg.len(), n_neg)
                .into_iter()
                .map(|i| neg[i]),
        );
        chosen
    } else {
        sample(&mut rng, complete.len(), total)
            .into_iter()
            .map(|i| complete[i])
            .collect()
    };
    test_rows.sort_unstable();
    let train_rows = (0..ds.n_rows())
        .filter(|r| test_rows.binary_search(r).is_err())
        .collect();
    Ok(DataSplit {
        train_rows,
        test_rows,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `n` rows, the first `complete` of which are complete; alternating labels.
    fn shaped(n: usize, complete: usize) -> GappedDataset {
        let mut present = Vec::with_capacity(2 * n);
        for r in 0..n {
            present.push(true);
            present.push(r < complete);
        }
        GappedDataset::new(
            vec!["a".into(), "b".into()],
            vec![0.0; 2 * n],
            present,
            (0..n).map(|r| (r % 2) as u8).collect(),
        )
        .unwrap()
    }

    #[test]
    fn madelon_and_covid_shapes() {
        let s = split(&shaped(1000, 100), 0.2, 1, true).unwrap();
        assert_eq!((s.test_rows.len(), s.train_rows.len()), (20, 980));
        let s = split(&shaped(3926, 501), 0.2, 1, true).unwrap();
        assert_eq!((s.test_rows.len(), s.train_rows.len()), (100, 3826));
    }

    #[test]
    fn partition_and_determinism() {
        let ds = shaped(50, 20);
        let a = split(&ds, 0.3, 9, false).unwrap();
        assert_eq!(a, split(&ds, 0.3, 9, false).unwrap());
        let mut all: Vec<usize> = a.train_rows.iter().chain(&a.test_rows).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..50).collect::<Vec<_>>());
        assert!(a.test_rows.iter().all(|&r| r < 20));
    }

    #[test]
    fn stratified_keeps_class_ratio() {
        let ds = shaped(200, 100);
        for seed in 0..20 {
            let s = split(&ds, 0.2, seed, true).unwrap();
            let pos = s.test_rows.iter().filter(|&&r| ds.label(r) == 1).count();
            assert!((pos as i64 - 10).abs() <= 1);
        }
    }

    #[test]
    fn too_few_complete_rows() {
        assert!(split(&shaped(10, 1), 0.2, 0, false).is_err());
        assert!(split(&shaped(10, 5), 0.0, 0, false).is_err());
        assert!(split(&shaped(10, 5), 1.0, 0, false).is_err());
    }
}
