use serde::{Deserialize, Serialize};

use super::GappedDataset;
use crate::error::{Error, Result};

/// Per-feature mean and (population) standard deviation over present cells
/// of the fitting rows. A zero or undefined spread is stored as 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormalizationStats {
    pub fn fit(ds: &GappedDataset, rows: &[usize]) -> Self {
        let f = ds.n_features();
        let mut mean = vec![0.0; f];
        let mut std = vec![1.0; f];
        for c in 0..f {
            let vals: Vec<f64> = rows.iter().filter_map(|&r| ds.get(r, c)).collect();
            if vals.is_empty() {
                continue;
            }
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / vals.len() as f64;
            mean[c] = m;
            let s = var.sqrt();
            std[c] = if s > 0.0 && s.is_finite() { s } else { 1.0 };
        }
        NormalizationStats { mean, std }
    }

    /// Stats that leave values unchanged.
    pub fn identity(n_features: usize) -> Self {
        NormalizationStats {
            mean: vec![0.0; n_features],
            std: vec![1.0; n_features],
        }
    }

    fn check(&self, ds: &GappedDataset) -> Result<()> {
        if self.mean.len() != ds.n_features() || self.std.len() != ds.n_features() {
            return Err(Error::Dimension {
                context: "normalization stats width",
                expected: ds.n_features(),
                actual: self.mean.len(),
            });
        }
        if self.std.iter().any(|s| *s <= 0.0 || !s.is_finite())
            || self.mean.iter().any(|m| !m.is_finite())
        {
            return Err(Error::invalid(
                "normalization stats must be finite with positive std",
            ));
        }
        Ok(())
    }

    /// `(x - mean) / std` on present cells; absent cells stay absent.
    pub fn normalize(&self, ds: &GappedDataset) -> Result<GappedDataset> {
        self.check(ds)?;
        Ok(ds.map_present(|c, v| (v - self.mean[c]) / self.std[c]))
    }

    pub fn denormalize(&self, ds: &GappedDataset) -> Result<GappedDataset> {
        self.check(ds)?;
        Ok(ds.map_present(|c, v| v * self.std[c] + self.mean[c]))
    }

    /// Transform a single dense row of the given features in place.
    pub fn apply_row(&self, features: &[usize], row: &mut [f64]) {
        for (v, &c) in row.iter_mut().zip(features) {
            *v = (*v - self.mean[c]) / self.std[c];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(values: Vec<f64>, present: Vec<bool>) -> GappedDataset {
        let n = values.len() / 2;
        GappedDataset::new(vec!["a".into(), "b".into()], values, present, vec![0; n]).unwrap()
    }

    #[test]
    fn constant_feature_maps_to_zero() {
        let d = ds(vec![3.0, 1.0, 3.0, 2.0, 3.0, 4.0], vec![true; 6]);
        let stats = NormalizationStats::fit(&d, &[0, 1, 2]);
        assert_eq!(stats.std[0], 1.0);
        let n = stats.normalize(&d).unwrap();
        assert!((0..3).all(|r| n.get(r, 0) == Some(0.0)));
    }

    #[test]
    fn standardized_feature_is_unchanged_and_round_trip() {
        // a: mean 0, population std 1
        let d = ds(
            vec![-1.0, 10.0, 1.0, f64::NAN, -1.0, 7.5, 1.0, -2.25],
            vec![true, true, true, false, true, true, true, true],
        );
        let stats = NormalizationStats::fit(&d, &[0, 1, 2, 3]);
        let n = stats.normalize(&d).unwrap();
        for r in 0..4 {
            assert!((n.get(r, 0).unwrap() - d.get(r, 0).unwrap()).abs() < 1e-12);
        }
        assert_eq!(n.get(1, 1), None);
        let back = stats.denormalize(&n).unwrap();
        for r in 0..4 {
            for c in 0..2 {
                match (back.get(r, c), d.get(r, c)) {
                    (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12),
                    (None, None) => {}
                    _ => panic!("mask changed"),
                }
            }
        }
    }

    #[test]
    fn fit_ignores_absent_cells_and_other_rows() {
        let d = ds(
            vec![1.0, 0.0, 3.0, 0.0, 100.0, 0.0],
            vec![true, false, true, false, true, false],
        );
        let stats = NormalizationStats::fit(&d, &[0, 1]);
        assert_eq!(stats.mean[0], 2.0);
        assert_eq!(stats.std[0], 1.0);
        // no present cells at all for b
        assert_eq!((stats.mean[1], stats.std[1]), (0.0, 1.0));
    }
}
