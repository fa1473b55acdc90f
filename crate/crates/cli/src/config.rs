//! Fully resolved command configurations. These are what manifests record
//! and what `--manifest` replays.

use std::path::{Path, PathBuf};

use gapnet::clustering::{
    merge_clusters, parse_plan, signature_clusters, validate_plan, ClusterPlan,
};
use gapnet::dataset::{load_csv, CsvOptions, GappedDataset};
use gapnet::gapnet::{PipelineOptions, TrainConfig};
use gapnet::synth::{generate_madelon, inject_gaps, GapPattern, MadelonConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::{DataArgs, GeneratorArgs, PlanArgs, SplitArgs, TrainArgs};
use crate::error::{io_error, CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn file_sha256(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| io_error(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Hash of a configuration's canonical JSON form.
pub fn config_hash<T: Serialize>(config: &T) -> CliResult<String> {
    Ok(sha256_hex(serde_json::to_string(config)?.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    File {
        path: PathBuf,
        sha256: String,
        missing_token: String,
        label_column: String,
    },
    Synthetic {
        generator: MadelonConfig,
        gaps: bool,
    },
}

impl DataSource {
    pub fn resolve(data: &DataArgs, generator: &GeneratorArgs) -> CliResult<Self> {
        match (&data.data, data.paper_madelon.unwrap_or(false)) {
            (Some(_), true) => Err(CliError::validation(
                "give either --data or --paper-madelon, not both",
            )),
            (None, false) => Err(CliError::validation(
                "no dataset: pass --data <csv> or --paper-madelon",
            )),
            (None, true) => Ok(DataSource::Synthetic {
                generator: madelon_config(generator),
                gaps: generator.gaps.unwrap_or(true),
            }),
            (Some(path), false) => {
                let opts = CsvOptions::default();
                Ok(DataSource::File {
                    sha256: file_sha256(path)?,
                    path: path.clone(),
                    missing_token: data.missing_token.clone().unwrap_or(opts.missing_token),
                    label_column: data.label_column.clone().unwrap_or(opts.label_column),
                })
            }
        }
    }

    pub fn load(&self) -> CliResult<GappedDataset> {
        match self {
            DataSource::File {
                path,
                sha256,
                missing_token,
                label_column,
            } => {
                let actual = file_sha256(path)?;
                if &actual != sha256 {
                    return Err(CliError::validation(format!(
                        "{} changed since the configuration was recorded (sha256 {actual}, expected {sha256})",
                        path.display()
                    )));
                }
                let opts = CsvOptions {
                    missing_token: missing_token.clone(),
                    label_column: label_column.clone(),
                };
                Ok(load_csv(path, &opts)?)
            }
            DataSource::Synthetic { generator, gaps } => synthesize(generator, *gaps),
        }
    }
}

pub fn madelon_config(g: &GeneratorArgs) -> MadelonConfig {
    let d = MadelonConfig::default();
    MadelonConfig {
        n_samples: g.n_samples.unwrap_or(d.n_samples),
        class_separation: g.class_separation.unwrap_or(d.class_separation),
        clusters_per_class: g.clusters_per_class.unwrap_or(d.clusters_per_class),
        random_covariance: g.random_covariance.unwrap_or(d.random_covariance),
        seed: g.data_seed.unwrap_or(d.seed),
        ..d
    }
}

pub fn synthesize(generator: &MadelonConfig, gaps: bool) -> CliResult<GappedDataset> {
    let ds = generate_madelon(generator)?;
    if !gaps {
        return Ok(ds);
    }
    if ds.n_rows() != 1000 {
        return Err(CliError::validation(format!(
            "the gap pattern is laid out for 1000 rows; use --gaps false with --n-samples {}",
            ds.n_rows()
        )));
    }
    Ok(inject_gaps(&ds, &GapPattern::two_blocks())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlanSource {
    File {
        path: PathBuf,
        sha256: String,
    },
    /// Features grouped by identical presence pattern, optionally merged.
    Signatures {
        min_support: Option<usize>,
    },
}

impl PlanSource {
    pub fn resolve(args: &PlanArgs) -> CliResult<Self> {
        match &args.plan {
            Some(path) => {
                if args.min_support.is_some() {
                    return Err(CliError::validation(
                        "--min-support applies to detected clusters, not to --plan",
                    ));
                }
                Ok(PlanSource::File {
                    sha256: file_sha256(path)?,
                    path: path.clone(),
                })
            }
            None => Ok(PlanSource::Signatures {
                min_support: args.min_support,
            }),
        }
    }

    /// Builds the plan and rejects it if clusters overlap or lack rows.
    pub fn load(&self, ds: &GappedDataset) -> CliResult<ClusterPlan> {
        let plan = match self {
            PlanSource::File { path, sha256 } => {
                let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
                let actual = sha256_hex(text.as_bytes());
                if &actual != sha256 {
                    return Err(CliError::validation(format!(
                        "{} changed since the configuration was recorded",
                        path.display()
                    )));
                }
                ClusterPlan::from_clusters(ds, parse_plan(&text, ds.feature_names())?)?
            }
            PlanSource::Signatures { min_support } => {
                let plan = signature_clusters(ds);
                match min_support {
                    Some(m) => merge_clusters(&plan, ds, *m)?,
                    None => plan,
                }
            }
        };
        let report = validate_plan(&plan, ds, None);
        if !report.is_valid() {
            return Err(
                CliError::validation("cluster plan is invalid").with_details(report.violations())
            );
        }
        if plan.clusters.is_empty() {
            return Err(CliError::validation("cluster plan has no clusters"));
        }
        Ok(plan)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub seed: u64,
    pub test_fraction: f64,
    pub stratified: bool,
}

impl SplitConfig {
    pub fn resolve(args: &SplitArgs) -> CliResult<Self> {
        let cfg = SplitConfig {
            seed: args.seed.unwrap_or(0),
            test_fraction: args.test_fraction.unwrap_or(0.2),
            stratified: args.stratified.unwrap_or(true),
        };
        if !(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0) {
            return Err(CliError::validation(format!(
                "test fraction must lie in (0, 1), got {}",
                cfg.test_fraction
            )));
        }
        Ok(cfg)
    }
}

/// Every training number the benchmark states, as a flag layer.
pub fn preset_training() -> TrainArgs {
    let d = TrainConfig::default();
    TrainArgs {
        epochs: Some(2000),
        learning_rate: Some(d.learning_rate),
        beta1: Some(d.beta1),
        beta2: Some(d.beta2),
        adam_epsilon: Some(d.adam_epsilon),
        dropout_rate: Some(0.5),
        hidden_multiplier: Some(2),
        freeze_bodies: Some(true),
        ..TrainArgs::default()
    }
}

pub fn pipeline_options(t: &TrainArgs, seed: u64) -> CliResult<PipelineOptions> {
    let d = PipelineOptions::default();
    let dt = &d.train;
    let opts = PipelineOptions {
        train: TrainConfig {
            epochs: t.epochs.unwrap_or(dt.epochs),
            learning_rate: t.learning_rate.unwrap_or(dt.learning_rate),
            beta1: t.beta1.unwrap_or(dt.beta1),
            beta2: t.beta2.unwrap_or(dt.beta2),
            adam_epsilon: t.adam_epsilon.unwrap_or(dt.adam_epsilon),
            batch_size: t.batch_size.or(dt.batch_size),
            dropout_rate: t.dropout_rate.unwrap_or(dt.dropout_rate),
            hidden_multiplier: t.hidden_multiplier.unwrap_or(dt.hidden_multiplier),
            seed,
            freeze_bodies: t.freeze_bodies.unwrap_or(dt.freeze_bodies),
        },
        standardize: t.standardize.unwrap_or(d.standardize),
        vanilla: true,
        gapnet: true,
        compare_freeze_modes: t.compare_freeze_modes.unwrap_or(d.compare_freeze_modes),
    };
    opts.train.validate()?;
    Ok(opts)
}
