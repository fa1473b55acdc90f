use serde::{Deserialize, Serialize};

use crate::clustering::FeatureCluster;
use crate::dataset::GappedDataset;
use crate::error::{Error, Result};
use crate::numerics::{DenseLayer, Matrix, Mlp};

/// Anything that scores dense rows laid out over a fixed list of dataset
/// features.
pub trait Classifier {
    /// Dataset feature indices consumed, in the column order expected by
    /// [`Classifier::score_matrix`].
    fn input_features(&self) -> Vec<usize>;

    /// Inference-mode scores, one per row.
    fn score_matrix(&self, x: &Matrix) -> Result<Vec<f64>>;
}

/// Scores `rows` of `ds`. Every row must have all features the model
/// consumes.
pub fn predict(model: &dyn Classifier, ds: &GappedDataset, rows: &[usize]) -> Result<Vec<f64>> {
    let x = ds.matrix(rows, &model.input_features())?;
    model.score_matrix(&x)
}

/// A classifier network reading a fixed subset of feature columns: the
/// vanilla model (all features) or a stage-I sub-network (one cluster).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureNet {
    pub features: Vec<usize>,
    pub net: Mlp,
}

impl FeatureNet {
    pub fn new(features: Vec<usize>, net: Mlp) -> Result<Self> {
        if net.input_width() != features.len() {
            return Err(Error::Dimension {
                context: "network input width vs feature list",
                expected: features.len(),
                actual: net.input_width(),
            });
        }
        if !net.is_classifier() {
            return Err(Error::invalid(
                "feature network must end in one sigmoid node",
            ));
        }
        Ok(FeatureNet { features, net })
    }
}

impl Classifier for FeatureNet {
    fn input_features(&self) -> Vec<usize> {
        self.features.clone()
    }

    fn score_matrix(&self, x: &Matrix) -> Result<Vec<f64>> {
        Ok(self.net.infer(x)?.column(0))
    }
}

/// A stage-I network with its output head removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Body {
    pub cluster: FeatureCluster,
    pub net: Mlp,
}

/// Stage-II model: bodies run side by side on their clusters, their last
/// hidden activations are concatenated in cluster order, and one sigmoid
/// node reads the concatenation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapNetModel {
    pub bodies: Vec<Body>,
    pub fusion: DenseLayer,
    pub freeze_bodies: bool,
}

impl GapNetModel {
    pub fn fusion_width(&self) -> usize {
        self.bodies.iter().map(|b| b.net.output_width()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.bodies.is_empty() {
            return Err(Error::invalid("fused model has no bodies"));
        }
        let mut seen = std::collections::HashSet::new();
        for b in &self.bodies {
            if b.net.input_width() != b.cluster.len() {
                return Err(Error::Dimension {
                    context: "body input width vs cluster size",
                    expected: b.cluster.len(),
                    actual: b.net.input_width(),
                });
            }
            for &f in &b.cluster.features {
                if !seen.insert(f) {
                    return Err(Error::invalid(format!(
                        "feature index {} feeds more than one body",
                        f + 1
                    )));
                }
            }
        }
        if self.fusion.fan_in() != self.fusion_width() || self.fusion.fan_out() != 1 {
            return Err(Error::Dimension {
                context: "fusion input width",
                expected: self.fusion_width(),
                actual: self.fusion.fan_in(),
            });
        }
        Ok(())
    }

    /// Concatenated inference-mode body activations for a matrix laid out
    /// as [`Classifier::input_features`].
    pub fn body_activations(&self, x: &Matrix) -> Result<Matrix> {
        let expected: usize = self.bodies.iter().map(|b| b.cluster.len()).sum();
        if x.cols() != expected {
            return Err(Error::Dimension {
                context: "fused model input width",
                expected,
                actual: x.cols(),
            });
        }
        let mut offset = 0;
        let mut outs = Vec::with_capacity(self.bodies.len());
        for b in &self.bodies {
            let block = x.column_block(offset, b.cluster.len());
            offset += b.cluster.len();
            outs.push(b.net.infer(&block)?);
        }
        Matrix::hstack(&outs.iter().collect::<Vec<_>>())
    }

    /// Flattened parameters of all bodies, in body order.
    pub fn body_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for b in &self.bodies {
            b.net.flat_params_into(&mut out);
        }
        out
    }
}

impl Classifier for GapNetModel {
    fn input_features(&self) -> Vec<usize> {
        self.bodies
            .iter()
            .flat_map(|b| b.cluster.features.iter().copied())
            .collect()
    }

    fn score_matrix(&self, x: &Matrix) -> Result<Vec<f64>> {
        let h = self.body_activations(x)?;
        Ok(self.fusion.activate(&self.fusion.affine(&h)?).column(0))
    }
}
