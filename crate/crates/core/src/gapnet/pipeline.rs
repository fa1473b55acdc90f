//! One train/test split end to end: standardize, train the baseline, run
//! both GapNet stages, and score every model on the held-out rows.

use serde::{Deserialize, Serialize};

use super::persist::{ModelKind, SavedModel};
use super::train::{fuse, train_stage1, train_stage2, train_vanilla};
use super::TrainConfig;
use crate::clustering::ClusterPlan;
use crate::dataset::{DataSplit, GappedDataset, NormalizationStats};
use crate::error::Result;
use crate::rng::{derive_seed, stream, tags};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineOptions {
    pub train: TrainConfig,
    /// z-score features with statistics of the training rows.
    pub standardize: bool,
    pub vanilla: bool,
    pub gapnet: bool,
    /// Also train the fused model with the opposite freeze setting.
    pub compare_freeze_modes: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            train: TrainConfig::default(),
            standardize: true,
            vanilla: true,
            gapnet: true,
            compare_freeze_modes: false,
        }
    }
}

/// Test-set scores of one trained model.
#[derive(Debug, Clone)]
pub struct ModelScores {
    pub name: String,
    pub train_rows: usize,
    pub scores: Vec<f64>,
    pub final_loss: f64,
    pub model: SavedModel,
}

#[derive(Debug, Clone)]
pub struct StageOneScore {
    pub cluster: String,
    pub result: ModelScores,
}

#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub split: DataSplit,
    pub test_labels: Vec<u8>,
    pub vanilla: Option<ModelScores>,
    pub stage1: Vec<StageOneScore>,
    pub gapnet: Option<ModelScores>,
    /// Fused model trained with the opposite freeze flag, when requested.
    pub gapnet_alt: Option<ModelScores>,
    /// Whether stage II left every body parameter bit-identical, for each
    /// fused model trained with frozen bodies.
    pub frozen_bodies_unchanged: Vec<bool>,
    /// Every row index used for training by any model.
    pub training_rows_seen: Vec<usize>,
}

pub fn gapnet_name(freeze: bool) -> &'static str {
    if freeze {
        "gapnet"
    } else {
        "gapnet_finetuned"
    }
}

pub fn run_split(
    raw: &GappedDataset,
    plan: &ClusterPlan,
    split: &DataSplit,
    opts: &PipelineOptions,
) -> Result<SplitOutcome> {
    opts.train.validate()?;
    let stats = opts
        .standardize
        .then(|| NormalizationStats::fit(raw, &split.train_rows));
    let ds = match &stats {
        Some(s) => s.normalize(raw)?,
        None => raw.clone(),
    };
    let names = raw.feature_names().to_vec();
    let test = &split.test_rows;
    let mut seen = Vec::new();

    let score = |name: &str,
                 kind: ModelKind,
                 train_rows: &[usize],
                 final_loss: f64|
     -> Result<ModelScores> {
        let model = SavedModel::new(name, names.clone(), stats.clone(), kind)?;
        let scores = model.predict_dataset(raw, test)?;
        Ok(ModelScores {
            name: name.to_string(),
            train_rows: train_rows.len(),
            scores,
            final_loss,
            model,
        })
    };

    let vanilla = if opts.vanilla {
        let (net, rows, hist) = train_vanilla(&ds, split, &opts.train)?;
        seen.extend_from_slice(&rows);
        Some(score(
            "vanilla",
            ModelKind::Network(net),
            &rows,
            last(&hist.losses),
        )?)
    } else {
        None
    };

    let mut stage1 = Vec::new();
    let mut gapnet = None;
    let mut gapnet_alt = None;
    let mut frozen_bodies_unchanged = Vec::new();
    if opts.gapnet {
        let subnets = train_stage1(&ds, plan, split, &opts.train)?;
        for s in &subnets {
            seen.extend_from_slice(&s.train_rows);
            stage1.push(StageOneScore {
                cluster: s.cluster.name.clone(),
                result: score(
                    &format!("subnet:{}", s.cluster.name),
                    ModelKind::Network(s.model.clone()),
                    &s.train_rows,
                    last(&s.history.losses),
                )?,
            });
        }
        let modes: Vec<(bool, u64)> = if opts.compare_freeze_modes {
            vec![
                (opts.train.freeze_bodies, tags::FUSION),
                (!opts.train.freeze_bodies, tags::FUSION_FINETUNE),
            ]
        } else {
            vec![(opts.train.freeze_bodies, tags::FUSION)]
        };
        for (i, (freeze, tag)) in modes.into_iter().enumerate() {
            let mut rng = stream(derive_seed(opts.train.seed, tag));
            let fused = fuse(&subnets, freeze, &mut rng)?;
            let before = fused.body_params();
            let out = train_stage2(fused, &ds, split, &opts.train, &mut rng)?;
            if freeze {
                let after = out.model.body_params();
                frozen_bodies_unchanged.push(
                    before.len() == after.len()
                        && before
                            .iter()
                            .zip(&after)
                            .all(|(a, b)| a.to_bits() == b.to_bits()),
                );
            }
            seen.extend_from_slice(&out.train_rows);
            let result = score(
                gapnet_name(freeze),
                ModelKind::GapNet(out.model),
                &out.train_rows,
                last(&out.history.losses),
            )?;
            if i == 0 {
                gapnet = Some(result);
            } else {
                gapnet_alt = Some(result);
            }
        }
    }
    seen.sort_unstable();
    seen.dedup();

    Ok(SplitOutcome {
        split: split.clone(),
        test_labels: test.iter().map(|&r| raw.label(r)).collect(),
        vanilla,
        stage1,
        gapnet,
        gapnet_alt,
        frozen_bodies_unchanged,
        training_rows_seen: seen,
    })
}

fn last(v: &[f64]) -> f64 {
    v.last().copied().unwrap_or(f64::NAN)
}
