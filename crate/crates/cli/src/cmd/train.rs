use gapnet::clustering::ClusterPlan;
use gapnet::dataset::{split, GappedDataset};
use gapnet::eval::{auc, confusion_at, metrics, ConfusionCounts, MetricReport};
use gapnet::gapnet::{run_split, ModelScores, PipelineOptions, SplitOutcome};
use gapnet::rng::{derive_seed, tags};
use serde::{Deserialize, Serialize};

use super::{file_stem, layer, print_json, Flags};
use crate::args::{ModelChoice, TrainArgs, TrainCmd};
use crate::config::{pipeline_options, preset_training, DataSource, PlanSource, SplitConfig};
use crate::error::CliResult;
use crate::manifest::{now_ms, Execution, ReportHeader, RunManifest, RunSeed};
use crate::output::OutputDir;

/// Scores at or above this count as positive in threshold metrics.
pub const DECISION_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainRunConfig {
    pub data: DataSource,
    pub plan: PlanSource,
    pub pipeline: PipelineOptions,
    pub split: SplitConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelEntry {
    pub name: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster: Option<String>,
    pub train_rows: usize,
    pub test_auc: f64,
    pub final_loss: f64,
    pub threshold: f64,
    pub confusion: ConfusionCounts,
    pub metrics: MetricReport,
    /// Relative to the output directory.
    pub model_file: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitSummary {
    pub seed: u64,
    pub split_seed: u64,
    pub test_fraction: f64,
    pub stratified: bool,
    pub train_rows: usize,
    pub test_rows: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub header: ReportHeader,
    pub split: SplitSummary,
    /// 1-based data row numbers of the test set.
    pub test_row_numbers: Vec<usize>,
    pub models: Vec<ModelEntry>,
    pub stage1: Vec<ModelEntry>,
    /// One entry per fused model trained with frozen bodies.
    pub frozen_bodies_unchanged: Vec<bool>,
}

pub const TRAIN_REPORT: &str = "train_report.json";

/// Seeds of one repetition: the pipeline seed and the split seed derived from it.
pub fn run_seed(run: usize, seed: u64) -> RunSeed {
    RunSeed {
        run,
        seed,
        split_seed: derive_seed(seed, tags::SPLIT),
    }
}

/// Draws the split for `seed` and trains every requested model on it.
pub fn train_once(
    ds: &GappedDataset,
    plan: &ClusterPlan,
    pipeline: &PipelineOptions,
    split_cfg: &SplitConfig,
    seed: u64,
) -> gapnet::Result<SplitOutcome> {
    let s = split(
        ds,
        split_cfg.test_fraction,
        derive_seed(seed, tags::SPLIT),
        split_cfg.stratified,
    )?;
    let mut opts = pipeline.clone();
    opts.train.seed = seed;
    run_split(ds, plan, &s, &opts)
}

fn entry(
    m: &ModelScores,
    kind: &str,
    cluster: Option<&str>,
    labels: &[u8],
    file: String,
) -> CliResult<ModelEntry> {
    let confusion = confusion_at(&m.scores, labels, DECISION_THRESHOLD)?;
    Ok(ModelEntry {
        name: m.name.clone(),
        kind: kind.into(),
        cluster: cluster.map(str::to_string),
        train_rows: m.train_rows,
        test_auc: auc(&m.scores, labels)?,
        final_loss: m.final_loss,
        threshold: DECISION_THRESHOLD,
        metrics: metrics(&confusion),
        confusion,
        model_file: file,
    })
}

pub fn run(cmd: &TrainCmd) -> CliResult<TrainReport> {
    let started = now_ms();
    let base = if cmd.paper_epochs {
        preset_training()
    } else {
        TrainArgs::default()
    };
    let layers = layer(
        &cmd.output_args,
        Flags {
            data: Some(&cmd.data),
            generator: Some(&cmd.generator),
            plan: Some(&cmd.plan),
            train: Some(&cmd.train),
            split: Some(&cmd.split),
            ..Flags::default()
        },
        base,
    )?;
    let split_cfg = SplitConfig::resolve(&layers.split)?;
    let mut pipeline = pipeline_options(&layers.train, split_cfg.seed)?;
    pipeline.vanilla = cmd.model != ModelChoice::Gapnet;
    pipeline.gapnet = cmd.model != ModelChoice::Vanilla;
    let config = TrainRunConfig {
        data: DataSource::resolve(&layers.data, &layers.generator)?,
        plan: PlanSource::resolve(&layers.plan)?,
        pipeline,
        split: split_cfg,
    };
    let ds = config.data.load()?;
    let plan = if config.pipeline.gapnet {
        config.plan.load(&ds)?
    } else {
        ClusterPlan::single(&ds)?
    };
    let outcome = train_once(
        &ds,
        &plan,
        &config.pipeline,
        &config.split,
        config.split.seed,
    )?;

    let mut out = OutputDir::create(&cmd.output_args.out_dir)?;
    let mut manifest = RunManifest::new(
        "train",
        &config,
        Execution {
            jobs: 1,
            out_dir: out.root().to_path_buf(),
        },
        started,
    )?;
    let seeds = run_seed(0, config.split.seed);
    manifest.run_seeds.push(seeds.clone());

    let labels = &outcome.test_labels;
    let save = |m: &ModelScores, out: &mut OutputDir| -> CliResult<String> {
        let rel = format!("models/{}.json", file_stem(&m.name));
        let mut text = m.model.to_json()?;
        text.push('\n');
        out.write_bytes(&rel, text.as_bytes())?;
        Ok(rel)
    };
    let mut models = Vec::new();
    if let Some(v) = &outcome.vanilla {
        let f = save(v, &mut out)?;
        models.push(entry(v, "vanilla", None, labels, f)?);
    }
    for g in outcome.gapnet.iter().chain(&outcome.gapnet_alt) {
        let f = save(g, &mut out)?;
        models.push(entry(g, "gapnet", None, labels, f)?);
    }
    let mut stage1 = Vec::new();
    for s in &outcome.stage1 {
        let f = save(&s.result, &mut out)?;
        stage1.push(entry(&s.result, "subnet", Some(&s.cluster), labels, f)?);
    }

    let report = TrainReport {
        header: ReportHeader::of(&manifest),
        split: SplitSummary {
            seed: seeds.seed,
            split_seed: seeds.split_seed,
            test_fraction: config.split.test_fraction,
            stratified: config.split.stratified,
            train_rows: outcome.split.train_rows.len(),
            test_rows: outcome.split.test_rows.len(),
        },
        test_row_numbers: outcome.split.test_rows.iter().map(|r| r + 1).collect(),
        models,
        stage1,
        frozen_bodies_unchanged: outcome.frozen_bodies_unchanged.clone(),
    };
    out.write_json(TRAIN_REPORT, &report)?;
    out.finish(manifest)?;
    print_json(&report)?;
    Ok(report)
}
