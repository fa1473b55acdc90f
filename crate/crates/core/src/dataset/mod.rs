//! Incomplete tabular data with an explicit per-cell presence mask.
//!
//! Missing cells hold a NaN sentinel in the value slot, but the mask is the
//! only thing consulted to decide presence. In debug builds, reading the
//! value of an absent cell through [`GappedDataset::value_unchecked`] panics.

mod csv_io;
mod normalize;
mod split;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use csv_io::{load_csv, read_csv, save_csv, write_csv, CsvOptions};
pub use normalize::NormalizationStats;
pub use split::{split, DataSplit};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GappedDataset {
    feature_names: Vec<String>,
    values: Vec<f64>,
    present: Vec<bool>,
    labels: Vec<u8>,
}

impl GappedDataset {
    /// Builds a dataset from row-major values and mask. Values of absent
    /// cells are ignored and replaced by the NaN sentinel.
    pub fn new(
        feature_names: Vec<String>,
        mut values: Vec<f64>,
        present: Vec<bool>,
        labels: Vec<u8>,
    ) -> Result<Self> {
        let f = feature_names.len();
        let n = labels.len();
        if f == 0 {
            return Err(Error::invalid("dataset needs at least one feature"));
        }
        if n == 0 {
            return Err(Error::invalid("dataset needs at least one row"));
        }
        if values.len() != n * f || present.len() != n * f {
            return Err(Error::Dimension {
                context: "dataset cell count",
                expected: n * f,
                actual: if values.len() != n * f {
                    values.len()
                } else {
                    present.len()
                },
            });
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::invalid(format!("duplicate feature name '{name}'")));
            }
        }
        if let Some(i) = labels.iter().position(|&y| y > 1) {
            return Err(Error::invalid(format!(
                "label at row {} is {}, expected 0 or 1",
                i + 1,
                labels[i]
            )));
        }
        for (i, (v, &p)) in values.iter_mut().zip(&present).enumerate() {
            if p {
                if !v.is_finite() {
                    return Err(Error::Cell {
                        row: i / f + 1,
                        column: feature_names[i % f].clone(),
                        message: "present cell is not a finite number".into(),
                    });
                }
            } else {
                *v = f64::NAN;
            }
        }
        Ok(GappedDataset {
            feature_names,
            values,
            present,
            labels,
        })
    }

    /// A dataset with every cell present.
    pub fn complete(feature_names: Vec<String>, x: &Matrix, labels: Vec<u8>) -> Result<Self> {
        if x.cols() != feature_names.len() {
            return Err(Error::Dimension {
                context: "feature names vs columns",
                expected: x.cols(),
                actual: feature_names.len(),
            });
        }
        let present = vec![true; x.as_slice().len()];
        GappedDataset::new(feature_names, x.as_slice().to_vec(), present, labels)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label(&self, row: usize) -> u8 {
        self.labels[row]
    }

    #[inline]
    pub fn is_present(&self, row: usize, col: usize) -> bool {
        self.present[row * self.n_features() + col]
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        if self.is_present(row, col) {
            Some(self.values[row * self.n_features() + col])
        } else {
            None
        }
    }

    /// Raw value slot. Callers must have checked presence.
    #[inline]
    pub fn value_unchecked(&self, row: usize, col: usize) -> f64 {
        debug_assert!(
            self.is_present(row, col),
            "read of absent cell (row {}, feature '{}')",
            row + 1,
            self.feature_names[col]
        );
        self.values[row * self.n_features() + col]
    }

    pub fn present_mask(&self) -> &[bool] {
        &self.present
    }

    /// True for rows where every listed feature is present.
    pub fn row_has(&self, row: usize, features: &[usize]) -> bool {
        features.iter().all(|&c| self.is_present(row, c))
    }

    /// Rows where every feature is present, ascending.
    pub fn complete_rows(&self) -> Vec<usize> {
        let all: Vec<usize> = (0..self.n_features()).collect();
        self.complete_rows_for(&all)
    }

    /// Rows where every feature of `features` is present, ascending.
    pub fn complete_rows_for(&self, features: &[usize]) -> Vec<usize> {
        (0..self.n_rows())
            .filter(|&r| self.row_has(r, features))
            .collect()
    }

    /// Number of rows in which the feature is present.
    pub fn present_count(&self, col: usize) -> usize {
        (0..self.n_rows())
            .filter(|&r| self.is_present(r, col))
            .count()
    }

    /// Dense `rows × features` matrix; every requested cell must be present.
    pub fn matrix(&self, rows: &[usize], features: &[usize]) -> Result<Matrix> {
        let mut data = Vec::with_capacity(rows.len() * features.len());
        for &r in rows {
            if r >= self.n_rows() {
                return Err(Error::invalid(format!("row index {} out of range", r + 1)));
            }
            for &c in features {
                if c >= self.n_features() {
                    return Err(Error::invalid(format!(
                        "feature index {} out of range",
                        c + 1
                    )));
                }
                if !self.is_present(r, c) {
                    return Err(Error::MissingFeature {
                        row: r + 1,
                        feature: self.feature_names[c].clone(),
                    });
                }
                data.push(self.value_unchecked(r, c));
            }
        }
        Matrix::from_vec(rows.len(), features.len(), data)
    }

    /// Labels of the given rows as `f64` targets.
    pub fn targets(&self, rows: &[usize]) -> Vec<f64> {
        rows.iter().map(|&r| f64::from(self.labels[r])).collect()
    }

    /// Copy with the listed cells' values replaced; used by normalization.
    pub(crate) fn map_present(&self, mut f: impl FnMut(usize, f64) -> f64) -> GappedDataset {
        let nf = self.n_features();
        let mut out = self.clone();
        for (i, v) in out.values.iter_mut().enumerate() {
            if self.present[i] {
                *v = f(i % nf, *v);
            }
        }
        out
    }

    /// Marks a cell absent.
    pub(crate) fn clear(&mut self, row: usize, col: usize) {
        let i = row * self.n_features() + col;
        self.present[i] = false;
        self.values[i] = f64::NAN;
    }

    /// Copy restricted to a subset of feature columns.
    pub fn select_features(&self, features: &[usize]) -> Result<GappedDataset> {
        let names = features
            .iter()
            .map(|&c| {
                self.feature_names
                    .get(c)
                    .cloned()
                    .ok_or_else(|| Error::invalid(format!("feature index {} out of range", c + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut values = Vec::with_capacity(self.n_rows() * features.len());
        let mut present = Vec::with_capacity(values.capacity());
        for r in 0..self.n_rows() {
            for &c in features {
                values.push(self.get(r, c).unwrap_or(f64::NAN));
                present.push(self.is_present(r, c));
            }
        }
        GappedDataset::new(names, values, present, self.labels.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("x{i}")).collect()
    }

    fn toy() -> GappedDataset {
        // row 1 complete, row 2 missing x2, row 3 missing x1
        GappedDataset::new(
            names(2),
            vec![1.0, 2.0, 3.0, 0.0, 0.0, 6.0],
            vec![true, true, true, false, false, true],
            vec![0, 1, 1],
        )
        .unwrap()
    }

    #[test]
    fn complete_rows_and_cluster_rows() {
        let ds = toy();
        assert_eq!(ds.complete_rows(), vec![0]);
        assert_eq!(ds.complete_rows_for(&[0]), vec![0, 1]);
        assert_eq!(ds.complete_rows_for(&[1]), vec![0, 2]);
        assert_eq!(ds.complete_rows_for(&[]), vec![0, 1, 2]);
    }

    #[test]
    fn all_missing_feature_means_no_complete_rows() {
        let ds = GappedDataset::new(
            names(2),
            vec![1.0, 0.0, 2.0, 0.0],
            vec![true, false, true, false],
            vec![0, 1],
        )
        .unwrap();
        assert!(ds.complete_rows().is_empty());
    }

    #[test]
    fn absent_cells_hold_nan_and_matrix_refuses_them() {
        let ds = toy();
        assert_eq!(ds.get(1, 1), None);
        let err = ds.matrix(&[1], &[0, 1]).unwrap_err();
        match err {
            Error::MissingFeature { row, feature } => {
                assert_eq!(row, 2);
                assert_eq!(feature, "x2");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(ds.matrix(&[0, 2], &[1]).unwrap().as_slice(), &[2.0, 6.0]);
    }

    #[test]
    #[cfg(debug_assertions)]
    #[should_panic(expected = "read of absent cell")]
    fn reading_absent_cell_is_poisoned() {
        let ds = toy();
        let _ = ds.value_unchecked(1, 1);
    }

    #[test]
    fn validation() {
        assert!(GappedDataset::new(
            vec!["a".into(), "a".into()],
            vec![0.0; 2],
            vec![true; 2],
            vec![0]
        )
        .is_err());
        assert!(GappedDataset::new(names(1), vec![0.0], vec![true], vec![2]).is_err());
        assert!(GappedDataset::new(names(1), vec![], vec![], vec![]).is_err());
        assert!(GappedDataset::new(names(1), vec![f64::NAN], vec![true], vec![1]).is_err());
    }
}
