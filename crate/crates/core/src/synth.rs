//! Madelon-style synthetic benchmark and block missingness.
//!
//! Points are drawn from Gaussian clusters centred on vertices of a
//! hypercube in the informative subspace; clusters alternate between the two
//! classes. Redundant columns are random linear combinations of the
//! informative block and noise columns are independent standard normals.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::GappedDataset;
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::rng::{stream, RandomStream};

/// 1-based informative columns of the 40-feature benchmark.
pub const MADELON_INFORMATIVE: [usize; 25] = [
    1, 3, 4, 5, 8, 10, 11, 13, 14, 15, 18, 20, 22, 25, 26, 27, 28, 29, 31, 33, 34, 35, 36, 39, 40,
];
/// 1-based redundant (linear-combination) columns.
pub const MADELON_REDUNDANT: [usize; 10] = [2, 6, 7, 9, 12, 17, 19, 24, 30, 37];
/// 1-based pure-noise columns.
pub const MADELON_NOISE: [usize; 5] = [16, 21, 23, 32, 38];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MadelonConfig {
    pub n_samples: usize,
    pub n_features: usize,
    /// 0-based column indices.
    pub informative: Vec<usize>,
    pub redundant: Vec<usize>,
    pub noise: Vec<usize>,
    /// Half the hypercube side length.
    pub class_separation: f64,
    pub clusters_per_class: usize,
    /// Multiply each cluster's standard-normal draws by a random
    /// `[-1, 1]`-uniform matrix, giving clusters random covariance.
    pub random_covariance: bool,
    pub seed: u64,
}

impl Default for MadelonConfig {
    fn default() -> Self {
        let zero_based = |v: &[usize]| v.iter().map(|i| i - 1).collect();
        MadelonConfig {
            n_samples: 1000,
            n_features: 40,
            informative: zero_based(&MADELON_INFORMATIVE),
            redundant: zero_based(&MADELON_REDUNDANT),
            noise: zero_based(&MADELON_NOISE),
            class_separation: 1.0,
            clusters_per_class: 2,
            random_covariance: true,
            seed: 0,
        }
    }
}

impl MadelonConfig {
    pub fn validate(&self) -> Result<()> {
        let total = self.informative.len() + self.redundant.len() + self.noise.len();
        if total != self.n_features {
            return Err(Error::config(format!(
                "index sets cover {total} columns but n_features is {}",
                self.n_features
            )));
        }
        let mut seen = vec![false; self.n_features];
        for &i in self
            .informative
            .iter()
            .chain(&self.redundant)
            .chain(&self.noise)
        {
            if i >= self.n_features {
                return Err(Error::config(format!(
                    "column index {} out of range",
                    i + 1
                )));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::config(format!("column {} listed twice", i + 1)));
            }
        }
        if self.informative.is_empty() {
            return Err(Error::config("need at least one informative feature"));
        }
        if !(self.class_separation > 0.0 && self.class_separation.is_finite()) {
            return Err(Error::config("class separation must be > 0"));
        }
        if self.clusters_per_class == 0 {
            return Err(Error::config("clusters per class must be >= 1"));
        }
        let vertices = 2f64.powi(self.informative.len().min(1000) as i32);
        if ((2 * self.clusters_per_class) as f64) > vertices {
            return Err(Error::config(format!(
                "{} clusters do not fit on a {}-dimensional hypercube",
                2 * self.clusters_per_class,
                self.informative.len()
            )));
        }
        if self.n_samples < 2 * self.clusters_per_class {
            return Err(Error::config("fewer samples than clusters"));
        }
        Ok(())
    }
}

pub fn feature_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

pub fn generate_madelon(cfg: &MadelonConfig) -> Result<GappedDataset> {
    cfg.validate()?;
    let mut rng = stream(cfg.seed);
    let n_inf = cfg.informative.len();
    let n_clusters = 2 * cfg.clusters_per_class;
    let centroids = hypercube_vertices(n_clusters, n_inf, cfg.class_separation, &mut rng);

    let mut informative = Matrix::zeros(cfg.n_samples, n_inf);
    let mut labels = Vec::with_capacity(cfg.n_samples);
    let base = cfg.n_samples / n_clusters;
    let extra = cfg.n_samples % n_clusters;
    let mut row = 0;
    for (k, centroid) in centroids.iter().enumerate() {
        let count = base + usize::from(k < extra);
        let mut block = Matrix::from_vec(count, n_inf, normals(count * n_inf, &mut rng))?;
        if cfg.random_covariance {
            let a = uniform_matrix(n_inf, n_inf, &mut rng)?;
            block = block.matmul(&a)?;
        }
        for r in 0..count {
            for (dst, (v, c)) in informative
                .row_mut(row)
                .iter_mut()
                .zip(block.row(r).iter().zip(centroid))
            {
                *dst = v + c;
            }
            labels.push((k % 2) as u8);
            row += 1;
        }
    }

    let mut redundant = Matrix::zeros(cfg.n_samples, 0);
    if !cfg.redundant.is_empty() {
        let b = uniform_matrix(n_inf, cfg.redundant.len(), &mut rng)?;
        redundant = informative.matmul(&b)?;
        standardize_columns(&mut redundant);
    }
    let noise = Matrix::from_vec(
        cfg.n_samples,
        cfg.noise.len(),
        normals(cfg.n_samples * cfg.noise.len(), &mut rng),
    )?;

    let mut order: Vec<usize> = (0..cfg.n_samples).collect();
    order.shuffle(&mut rng);

    let f = cfg.n_features;
    let mut values = vec![0.0; cfg.n_samples * f];
    let mut shuffled_labels = Vec::with_capacity(cfg.n_samples);
    for (dst_row, &src) in order.iter().enumerate() {
        let out = &mut values[dst_row * f..(dst_row + 1) * f];
        for (j, &col) in cfg.informative.iter().enumerate() {
            out[col] = informative.get(src, j);
        }
        for (j, &col) in cfg.redundant.iter().enumerate() {
            out[col] = redundant.get(src, j);
        }
        for (j, &col) in cfg.noise.iter().enumerate() {
            out[col] = noise.get(src, j);
        }
        shuffled_labels.push(labels[src]);
    }
    GappedDataset::new(
        feature_names(f),
        values,
        vec![true; cfg.n_samples * f],
        shuffled_labels,
    )
}

/// `count` distinct vertices of `{-sep, +sep}^dim`.
fn hypercube_vertices(count: usize, dim: usize, sep: f64, rng: &mut RandomStream) -> Vec<Vec<f64>> {
    let mut picked: Vec<Vec<bool>> = Vec::with_capacity(count);
    while picked.len() < count {
        let v: Vec<bool> = (0..dim).map(|_| rng.random::<bool>()).collect();
        if !picked.contains(&v) {
            picked.push(v);
        }
    }
    picked
        .into_iter()
        .map(|v| v.into_iter().map(|b| if b { sep } else { -sep }).collect())
        .collect()
}

fn normals(n: usize, rng: &mut RandomStream) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn uniform_matrix(rows: usize, cols: usize, rng: &mut RandomStream) -> Result<Matrix> {
    Matrix::from_vec(
        rows,
        cols,
        (0..rows * cols)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect(),
    )
}

fn standardize_columns(m: &mut Matrix) {
    let n = m.rows() as f64;
    for c in 0..m.cols() {
        let col = m.column(c);
        let mean = col.iter().sum::<f64>() / n;
        let sd = (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
        let sd = if sd > 0.0 { sd } else { 1.0 };
        for r in 0..m.rows() {
            m.set(r, c, (m.get(r, c) - mean) / sd);
        }
    }
}

/// Rectangular block of cells to remove: 0-based, half-open ranges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapBlock {
    pub rows: (usize, usize),
    pub features: (usize, usize),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapPattern {
    pub blocks: Vec<GapBlock>,
}

impl GapPattern {
    /// Rows 1–450 lose x1–x25 and rows 551–1000 lose x26–x40, leaving rows
    /// 451–550 complete.
    pub fn two_blocks() -> Self {
        GapPattern {
            blocks: vec![
                GapBlock {
                    rows: (0, 450),
                    features: (0, 25),
                },
                GapBlock {
                    rows: (550, 1000),
                    features: (25, 40),
                },
            ],
        }
    }
}

pub fn inject_gaps(ds: &GappedDataset, pattern: &GapPattern) -> Result<GappedDataset> {
    if ds.present_mask().iter().any(|p| !p) {
        return Err(Error::invalid(
            "gap injection expects a fully present dataset",
        ));
    }
    for b in &pattern.blocks {
        if b.rows.0 > b.rows.1
            || b.features.0 > b.features.1
            || b.rows.1 > ds.n_rows()
            || b.features.1 > ds.n_features()
        {
            return Err(Error::invalid(format!(
                "gap block rows {:?} x features {:?} outside a {}x{} dataset",
                b.rows,
                b.features,
                ds.n_rows(),
                ds.n_features()
            )));
        }
    }
    let mut out = ds.clone();
    for b in &pattern.blocks {
        for r in b.rows.0..b.rows.1 {
            for c in b.features.0..b.features.1 {
                out.clear(r, c);
            }
        }
    }
    Ok(out)
}

/// The 1000×40 benchmark with its two-block missingness.
pub fn gapped_madelon(seed: u64) -> Result<GappedDataset> {
    let ds = generate_madelon(&MadelonConfig {
        seed,
        ..MadelonConfig::default()
    })?;
    inject_gaps(&ds, &GapPattern::two_blocks())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shape_and_balance() {
        let ds = generate_madelon(&MadelonConfig::default()).unwrap();
        assert_eq!((ds.n_rows(), ds.n_features()), (1000, 40));
        let pos = ds.labels().iter().filter(|&&y| y == 1).count();
        assert!((pos as i64 - 500).abs() <= 1);
        assert_eq!(ds.complete_rows().len(), 1000);
    }

    #[test]
    fn odd_sample_count_stays_balanced() {
        let ds = generate_madelon(&MadelonConfig {
            n_samples: 1003,
            ..MadelonConfig::default()
        })
        .unwrap();
        let pos = ds.labels().iter().filter(|&&y| y == 1).count() as i64;
        assert!((1003 - 2 * pos).abs() <= 1);
    }

    #[test]
    fn seed_determinism() {
        let cfg = MadelonConfig {
            seed: 5,
            ..MadelonConfig::default()
        };
        assert_eq!(
            generate_madelon(&cfg).unwrap(),
            generate_madelon(&cfg).unwrap()
        );
        let other = MadelonConfig { seed: 6, ..cfg };
        assert_ne!(
            generate_madelon(&other).unwrap(),
            generate_madelon(&MadelonConfig {
                seed: 5,
                ..MadelonConfig::default()
            })
            .unwrap()
        );
    }

    #[test]
    fn index_sets_must_partition() {
        let mut cfg = MadelonConfig::default();
        cfg.noise[0] = cfg.informative[0];
        assert!(generate_madelon(&cfg).is_err());
        let cfg = MadelonConfig {
            n_features: 41,
            ..MadelonConfig::default()
        };
        assert!(generate_madelon(&cfg).is_err());
    }

    #[test]
    fn two_block_pattern_leaves_rows_451_to_550() {
        let ds = gapped_madelon(0).unwrap();
        let complete = ds.complete_rows();
        assert_eq!(complete, (450..550).collect::<Vec<_>>());
        let c1: Vec<usize> = (0..25).collect();
        let c2: Vec<usize> = (25..40).collect();
        assert_eq!(ds.complete_rows_for(&c1).len(), 550);
        assert_eq!(ds.complete_rows_for(&c2).len(), 550);
    }

    #[test]
    fn empty_and_total_patterns() {
        let ds = generate_madelon(&MadelonConfig::default()).unwrap();
        assert_eq!(inject_gaps(&ds, &GapPattern::default()).unwrap(), ds);
        let all = GapPattern {
            blocks: vec![GapBlock {
                rows: (0, 1000),
                features: (0, 40),
            }],
        };
        assert!(inject_gaps(&ds, &all).unwrap().complete_rows().is_empty());
        let bad = GapPattern {
            blocks: vec![GapBlock {
                rows: (0, 1001),
                features: (0, 1),
            }],
        };
        assert!(inject_gaps(&ds, &bad).is_err());
    }
}
