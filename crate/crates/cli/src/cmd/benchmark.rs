use gapnet::eval::{
    aggregate_runs, auc, confusion_at, delong_test, metrics, roc_curve, ConfusionCounts,
    DelongResult, MetricReport, RocCurve, RunAggregate, DEFAULT_BIN_WIDTH,
};
use gapnet::gapnet::{gapnet_name, PipelineOptions, SplitOutcome};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::train::{run_seed, train_once, DECISION_THRESHOLD};
use super::{layer, print_json, Flags};
use crate::args::{
    BenchmarkArgs, BenchmarkCmd, DataArgs, GeneratorArgs, PlanArgs, SplitArgs, TrainArgs,
};
use crate::config::{pipeline_options, preset_training, DataSource, PlanSource, SplitConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::{now_ms, Execution, ReportHeader, RunManifest, RunSeed};
use crate::output::{num, OutputDir, Table};

pub const BENCHMARK_REPORT: &str = "benchmark_report.json";
pub const ROC_CSV: &str = "roc_mean.csv";
pub const HISTOGRAM_CSV: &str = "auc_histogram.csv";
pub const RUN_AUCS_CSV: &str = "run_aucs.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub data: DataSource,
    pub plan: PlanSource,
    pub pipeline: PipelineOptions,
    /// `split.seed` is the base seed; run `i` uses `seed ^ i`.
    pub split: SplitConfig,
    pub runs: usize,
    pub bin_width: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunDelong {
    pub run: usize,
    pub result: Option<DelongResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DelongSection {
    pub model_a: String,
    pub model_b: String,
    /// Test scores of all runs concatenated.
    pub pooled: DelongResult,
    pub per_run: Vec<RunDelong>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub model: String,
    pub threshold: f64,
    /// Summed over runs.
    pub confusion: ConfusionCounts,
    pub metrics: MetricReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FreezeCheck {
    pub runs_checked: usize,
    pub all_unchanged: bool,
    pub per_run: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub header: ReportHeader,
    pub runs: usize,
    pub run_seeds: Vec<RunSeed>,
    pub test_rows_per_run: Vec<usize>,
    pub models: Vec<RunAggregate>,
    /// Single-cluster networks, highest median AUC first.
    pub subnets: Vec<RunAggregate>,
    pub auc_mean_difference: f64,
    pub delong: DelongSection,
    pub threshold_metrics: Vec<ThresholdRow>,
    pub freeze_check: FreezeCheck,
}

/// One model's results across runs.
#[derive(Default)]
struct Series {
    name: String,
    curves: Vec<RocCurve>,
    aucs: Vec<f64>,
    scores: Vec<Vec<f64>>,
    confusion: ConfusionCounts,
}

impl Series {
    fn push(&mut self, scores: &[f64], labels: &[u8]) -> CliResult<()> {
        self.curves.push(roc_curve(scores, labels)?);
        self.aucs.push(auc(scores, labels)?);
        self.confusion
            .add(&confusion_at(scores, labels, DECISION_THRESHOLD)?);
        self.scores.push(scores.to_vec());
        Ok(())
    }

    fn aggregate(&self, bin_width: f64) -> CliResult<RunAggregate> {
        Ok(aggregate_runs(
            &self.name,
            &self.curves,
            &self.aucs,
            bin_width,
        )?)
    }

    fn threshold_row(&self) -> ThresholdRow {
        ThresholdRow {
            model: self.name.clone(),
            threshold: DECISION_THRESHOLD,
            confusion: self.confusion,
            metrics: metrics(&self.confusion),
        }
    }
}

fn series<'a>(all: &'a mut Vec<Series>, name: &str) -> &'a mut Series {
    if let Some(i) = all.iter().position(|s| s.name == name) {
        return &mut all[i];
    }
    all.push(Series {
        name: name.to_string(),
        ..Series::default()
    });
    all.last_mut().expect("just pushed")
}

fn resolve(cmd: &BenchmarkCmd) -> CliResult<(BenchmarkConfig, usize)> {
    let jobs_flag = cmd.bench.jobs;
    if let Some(path) = &cmd.manifest {
        let only_execution = BenchmarkArgs {
            jobs: cmd.bench.jobs,
            ..BenchmarkArgs::default()
        };
        if cmd.paper_epochs
            || cmd.data != DataArgs::default()
            || cmd.generator != GeneratorArgs::default()
            || cmd.plan != PlanArgs::default()
            || cmd.train != TrainArgs::default()
            || cmd.split != SplitArgs::default()
            || cmd.bench != only_execution
        {
            return Err(CliError::validation(
                "--manifest replays a recorded configuration; only --jobs and --out-dir may be given with it",
            ));
        }
        let m = RunManifest::load(path)?;
        let config = m.config_for::<BenchmarkConfig>("benchmark")?;
        return Ok((config, jobs_flag.unwrap_or(m.execution.jobs)));
    }
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
            bench: Some(&cmd.bench),
            ..Flags::default()
        },
        base,
    )?;
    let split = SplitConfig::resolve(&layers.split)?;
    let config = BenchmarkConfig {
        data: DataSource::resolve(&layers.data, &layers.generator)?,
        plan: PlanSource::resolve(&layers.plan)?,
        pipeline: pipeline_options(&layers.train, split.seed)?,
        split,
        runs: layers.bench.runs.unwrap_or(100),
        bin_width: layers.bench.bin_width.unwrap_or(DEFAULT_BIN_WIDTH),
    };
    Ok((config, layers.bench.jobs.unwrap_or(1)))
}

pub fn run(cmd: &BenchmarkCmd) -> CliResult<BenchmarkReport> {
    let started = now_ms();
    let (mut config, jobs) = resolve(cmd)?;
    if config.runs < 2 {
        return Err(CliError::validation(format!(
            "a benchmark needs at least 2 runs, got {}",
            config.runs
        )));
    }
    if jobs == 0 {
        return Err(CliError::validation("--jobs must be at least 1"));
    }
    gapnet::eval::auc_histogram(&[], config.bin_width)?;
    config.pipeline.vanilla = true;
    config.pipeline.gapnet = true;

    let ds = config.data.load()?;
    let plan = config.plan.load(&ds)?;
    let seeds: Vec<RunSeed> = (0..config.runs)
        .map(|i| run_seed(i, config.split.seed ^ i as u64))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::runtime(format!("thread pool: {e}")))?;
    let outcomes: Vec<gapnet::Result<SplitOutcome>> = pool.install(|| {
        seeds
            .par_iter()
            .map(|s| train_once(&ds, &plan, &config.pipeline, &config.split, s.seed))
            .collect()
    });

    let mut done = Vec::with_capacity(outcomes.len());
    for (s, o) in seeds.iter().zip(outcomes) {
        match o {
            Ok(o) => done.push(o),
            Err(e) => {
                let mut err = CliError::runtime(format!(
                    "run {} (seed {}) failed: {e}; `train --seed {}` replays it",
                    s.run, s.seed, s.seed
                ));
                err.run = Some(s.run);
                err.seed = Some(s.seed);
                return Err(err);
            }
        }
    }

    let mut out = OutputDir::create(&cmd.output_args.out_dir)?;
    let mut manifest = RunManifest::new(
        "benchmark",
        &config,
        Execution {
            jobs,
            out_dir: out.root().to_path_buf(),
        },
        started,
    )?;
    let report = summarize(ReportHeader::of(&manifest), &config, &seeds, &done)?;
    manifest.run_seeds = seeds;
    write_tables(&mut out, &report)?;
    out.write_json(BENCHMARK_REPORT, &report)?;
    out.finish(manifest)?;
    print_json(&report)?;
    Ok(report)
}

fn summarize(
    header: ReportHeader,
    config: &BenchmarkConfig,
    seeds: &[RunSeed],
    done: &[SplitOutcome],
) -> CliResult<BenchmarkReport> {
    let mut models: Vec<Series> = Vec::new();
    let mut subnets: Vec<Series> = Vec::new();
    let mut labels_pooled = Vec::new();
    let mut per_run = Vec::new();
    for (i, o) in done.iter().enumerate() {
        let labels = &o.test_labels;
        labels_pooled.extend_from_slice(labels);
        let fused = [&o.vanilla, &o.gapnet, &o.gapnet_alt];
        for m in fused.iter().filter_map(|m| m.as_ref()) {
            series(&mut models, &m.name).push(&m.scores, labels)?;
        }
        for s in &o.stage1 {
            series(&mut subnets, &s.result.name).push(&s.result.scores, labels)?;
        }
        let (v, g) = match (&o.vanilla, &o.gapnet) {
            (Some(v), Some(g)) => (v, g),
            _ => return Err(CliError::runtime("benchmark run is missing a model")),
        };
        per_run.push(match delong_test(&g.scores, &v.scores, labels) {
            Ok(r) => RunDelong {
                run: i,
                result: Some(r),
                error: None,
            },
            Err(e) => RunDelong {
                run: i,
                result: None,
                error: Some(e.to_string()),
            },
        });
    }

    let pick = |name: &str| -> CliResult<&Series> {
        models
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| CliError::runtime(format!("no results for {name}")))
    };
    let primary = gapnet_name(config.pipeline.train.freeze_bodies);
    let g = pick(primary)?;
    let v = pick("vanilla")?;
    let pooled = delong_test(&g.scores.concat(), &v.scores.concat(), &labels_pooled)?;

    let model_aggs = models
        .iter()
        .map(|s| s.aggregate(config.bin_width))
        .collect::<CliResult<Vec<_>>>()?;
    let mut sub_aggs = subnets
        .iter()
        .map(|s| s.aggregate(config.bin_width))
        .collect::<CliResult<Vec<_>>>()?;
    sub_aggs.sort_by(|a, b| {
        b.auc_summary
            .median
            .total_cmp(&a.auc_summary.median)
            .then_with(|| a.model.cmp(&b.model))
    });

    let freeze: Vec<Vec<bool>> = done
        .iter()
        .map(|o| o.frozen_bodies_unchanged.clone())
        .collect();
    let mut threshold_metrics: Vec<ThresholdRow> =
        models.iter().map(Series::threshold_row).collect();
    threshold_metrics.extend(subnets.iter().map(Series::threshold_row));

    Ok(BenchmarkReport {
        header,
        runs: done.len(),
        run_seeds: seeds.to_vec(),
        test_rows_per_run: done.iter().map(|o| o.split.test_rows.len()).collect(),
        auc_mean_difference: gapnet::eval::stats::mean(&g.aucs)
            - gapnet::eval::stats::mean(&v.aucs),
        models: model_aggs,
        subnets: sub_aggs,
        delong: DelongSection {
            model_a: primary.to_string(),
            model_b: "vanilla".into(),
            pooled,
            per_run,
        },
        threshold_metrics,
        freeze_check: FreezeCheck {
            runs_checked: freeze.iter().filter(|f| !f.is_empty()).count(),
            all_unchanged: freeze.iter().flatten().all(|&b| b),
            per_run: freeze,
        },
    })
}

fn write_tables(out: &mut OutputDir, report: &BenchmarkReport) -> CliResult<()> {
    let all: Vec<&RunAggregate> = report.models.iter().chain(&report.subnets).collect();

    let mut roc = Table::new(&["model", "fpr", "tpr_mean", "tpr_std"]);
    for a in &all {
        for ((x, m), s) in a.fpr_grid.iter().zip(&a.tpr_mean).zip(&a.tpr_std) {
            roc.row(&[a.model.clone(), num(*x), num(*m), num(*s)]);
        }
    }
    out.write_bytes(ROC_CSV, &roc.into_bytes())?;

    let mut hist = Table::new(&["model", "lo", "hi", "count"]);
    for a in &all {
        for b in &a.histogram {
            hist.row(&[a.model.clone(), num(b.lo), num(b.hi), b.count.to_string()]);
        }
    }
    out.write_bytes(HISTOGRAM_CSV, &hist.into_bytes())?;

    let mut runs = Table::new(&["run", "seed", "model", "auc"]);
    for (i, s) in report.run_seeds.iter().enumerate() {
        for a in &all {
            runs.row(&[
                i.to_string(),
                s.seed.to_string(),
                a.model.clone(),
                num(a.aucs[i]),
            ]);
        }
    }
    out.write_bytes(RUN_AUCS_CSV, &runs.into_bytes())?;
    Ok(())
}
