//! Vanilla baseline and GapNet architectures, and the two training stages.

mod model;
mod persist;
mod pipeline;
mod train;

use rand::RngCore;
use serde::{Deserialize, Serialize};

pub use model::{predict, Body, Classifier, FeatureNet, GapNetModel};
pub use persist::{ModelKind, SavedModel, MODEL_FORMAT, MODEL_FORMAT_VERSION};
pub use pipeline::{
    gapnet_name, run_split, ModelScores, PipelineOptions, SplitOutcome, StageOneScore,
};
pub use train::{
    fuse, fused_gradient, train_stage1, train_stage2, train_vanilla, Stage2Outcome, TrainedSubnet,
};

use crate::clustering::FeatureCluster;
use crate::error::{Error, Result};
use crate::numerics::{Activation, AdamConfig, DenseLayer, DropoutSpec, FitConfig, Mlp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    /// `None` trains full-batch.
    pub batch_size: Option<usize>,
    pub dropout_rate: f64,
    /// Hidden width = multiplier × input width, for both hidden layers.
    pub hidden_multiplier: usize,
    pub seed: u64,
    pub freeze_bodies: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        TrainConfig {
            epochs: 2000,
            learning_rate: adam.learning_rate,
            beta1: adam.beta1,
            beta2: adam.beta2,
            adam_epsilon: adam.epsilon,
            batch_size: None,
            dropout_rate: 0.5,
            hidden_multiplier: 2,
            seed: 0,
            freeze_bodies: true,
        }
    }
}

impl TrainConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.adam_epsilon,
        }
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            epochs: self.epochs,
            adam: self.adam(),
            batch_size: self.batch_size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.fit_config().validate()?;
        DropoutSpec::new(self.dropout_rate, 0)?;
        if self.hidden_multiplier == 0 {
            return Err(Error::config("hidden multiplier must be >= 1"));
        }
        Ok(())
    }
}

/// Both hidden widths for an input of the given width.
pub fn hidden_widths(input_width: usize, multiplier: usize) -> [usize; 2] {
    [input_width * multiplier, input_width * multiplier]
}

/// `input → h0 (ReLU) → h1 (ReLU) → dropout → 1 (sigmoid)`.
pub fn build_classifier(
    input_width: usize,
    hidden: [usize; 2],
    dropout_rate: f64,
    rng: &mut dyn RngCore,
) -> Result<Mlp> {
    if input_width == 0 {
        return Err(Error::config("classifier needs at least one input"));
    }
    let layers = vec![
        DenseLayer::glorot(input_width, hidden[0], Activation::Relu, rng)?,
        DenseLayer::glorot(hidden[0], hidden[1], Activation::Relu, rng)?,
        DenseLayer::glorot(hidden[1], 1, Activation::Sigmoid, rng)?,
    ];
    Mlp::new(
        input_width,
        layers,
        vec![DropoutSpec::new(dropout_rate, 1)?],
    )
}

pub fn build_vanilla(
    n_features: usize,
    hidden_multiplier: usize,
    dropout_rate: f64,
    rng: &mut dyn RngCore,
) -> Result<Mlp> {
    build_classifier(
        n_features,
        hidden_widths(n_features, hidden_multiplier),
        dropout_rate,
        rng,
    )
}

pub fn build_subnet(
    cluster: &FeatureCluster,
    hidden_multiplier: usize,
    dropout_rate: f64,
    rng: &mut dyn RngCore,
) -> Result<Mlp> {
    if cluster.is_empty() {
        return Err(Error::invalid(format!(
            "cluster '{}' is empty",
            cluster.name
        )));
    }
    build_vanilla(cluster.len(), hidden_multiplier, dropout_rate, rng)
}
