//! Self-describing JSON model files.
//!
//! Floats are written in shortest round-trip decimal form and parsed back
//! exactly, so a reloaded model reproduces predictions bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{Classifier, FeatureNet, GapNetModel};
use crate::dataset::{GappedDataset, NormalizationStats};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const MODEL_FORMAT: &str = "gapnet-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    /// Vanilla network or a single stage-I sub-network.
    Network(FeatureNet),
    GapNet(GapNetModel),
}

impl ModelKind {
    fn as_classifier(&self) -> &dyn Classifier {
        match self {
            ModelKind::Network(m) => m,
            ModelKind::GapNet(m) => m,
        }
    }
}

/// A trained model together with the feature header it was trained on and
/// the standardization applied to its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SavedModel {
    pub format: String,
    pub format_version: u32,
    pub library_version: String,
    pub name: String,
    pub feature_names: Vec<String>,
    pub normalization: Option<NormalizationStats>,
    pub model: ModelKind,
}

impl SavedModel {
    pub fn new(
        name: impl Into<String>,
        feature_names: Vec<String>,
        normalization: Option<NormalizationStats>,
        model: ModelKind,
    ) -> Result<Self> {
        let saved = SavedModel {
            format: MODEL_FORMAT.into(),
            format_version: MODEL_FORMAT_VERSION,
            library_version: crate::VERSION.into(),
            name: name.into(),
            feature_names,
            normalization,
            model,
        };
        saved.validate()?;
        Ok(saved)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != MODEL_FORMAT {
            return Err(Error::Parse(format!(
                "not a model file (format '{}')",
                self.format
            )));
        }
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported model format version {}",
                self.format_version
            )));
        }
        let f = self.feature_names.len();
        if let Some(stats) = &self.normalization {
            if stats.mean.len() != f || stats.std.len() != f {
                return Err(Error::Parse(
                    "normalization width does not match feature list".into(),
                ));
            }
            if stats.std.iter().any(|s| *s <= 0.0 || !s.is_finite())
                || stats.mean.iter().any(|m| !m.is_finite())
            {
                return Err(Error::Parse(
                    "normalization stats must be finite with positive std".into(),
                ));
            }
        }
        match &self.model {
            ModelKind::Network(m) => {
                FeatureNet::new(m.features.clone(), m.net.clone())?;
            }
            ModelKind::GapNet(m) => m.validate()?,
        }
        let inputs = self.model.as_classifier().input_features();
        if let Some(&bad) = inputs.iter().find(|&&i| i >= f) {
            return Err(Error::Parse(format!(
                "model reads feature index {} but the file lists {f} features",
                bad + 1
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let saved: SavedModel = serde_json::from_str(text)?;
        saved.validate()?;
        Ok(saved)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SavedModel::from_json(&text)
    }

    pub fn classifier(&self) -> &dyn Classifier {
        self.model.as_classifier()
    }

    /// Names of the features the model consumes, in input order.
    pub fn input_feature_names(&self) -> Vec<String> {
        self.classifier()
            .input_features()
            .into_iter()
            .map(|i| self.feature_names[i].clone())
            .collect()
    }

    /// Resolves the model's inputs in `ds` by feature name.
    pub fn bind(&self, ds: &GappedDataset) -> Result<Vec<usize>> {
        self.input_feature_names()
            .iter()
            .map(|name| {
                ds.feature_index(name).ok_or_else(|| {
                    Error::invalid(format!(
                        "dataset lacks feature '{name}' required by the model"
                    ))
                })
            })
            .collect()
    }

    /// Scores rows of a raw (unstandardized) dataset.
    pub fn predict_dataset(&self, ds: &GappedDataset, rows: &[usize]) -> Result<Vec<f64>> {
        let columns = self.bind(ds)?;
        let x = ds.matrix(rows, &columns)?;
        self.score_raw(&x)
    }

    /// Scores a raw matrix laid out in the model's input order.
    pub fn score_raw(&self, x: &Matrix) -> Result<Vec<f64>> {
        let inputs = self.classifier().input_features();
        match &self.normalization {
            None => self.classifier().score_matrix(x),
            Some(stats) => {
                let mut z = x.clone();
                for r in 0..z.rows() {
                    stats.apply_row(&inputs, z.row_mut(r));
                }
                self.classifier().score_matrix(&z)
            }
        }
    }
}
