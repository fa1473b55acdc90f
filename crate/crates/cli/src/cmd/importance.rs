use std::path::PathBuf;

use gapnet::eval::{importance_report, FeatureImportance};
use gapnet::gapnet::SavedModel;
use gapnet::rng::{derive_seed, stream, tags};
use serde::{Deserialize, Serialize};

use super::train::TrainReport;
use super::{layer, print_json, Flags};
use crate::args::{ImportanceCmd, TrainArgs};
use crate::config::{file_sha256, DataSource};
use crate::error::{io_error, CliError, CliResult};
use crate::manifest::{now_ms, Execution, ReportHeader, RunManifest};
use crate::output::{num, OutputDir, Table};

pub const IMPORTANCE_JSON: &str = "importance.json";
pub const IMPORTANCE_CSV: &str = "importance.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum RowSource {
    /// Test rows listed in a train report.
    TrainReport { path: PathBuf, sha256: String },
    /// Every row complete in the model's inputs.
    CompleteForModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImportanceConfig {
    pub model: PathBuf,
    pub model_sha256: String,
    pub data: DataSource,
    pub rows: RowSource,
    pub repeats: usize,
    pub top_k: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImportanceOutput {
    pub header: ReportHeader,
    pub model: String,
    pub rows: usize,
    pub baseline_auc: f64,
    pub repeats: usize,
    pub top_k: usize,
    /// The `top_k` highest-ranked features.
    pub top: Vec<FeatureImportance>,
    /// Every input feature, in model input order.
    pub features: Vec<FeatureImportance>,
}

pub fn run(cmd: &ImportanceCmd) -> CliResult<ImportanceOutput> {
    let started = now_ms();
    let layers = layer(
        &cmd.output_args,
        Flags {
            data: Some(&cmd.data),
            generator: Some(&cmd.generator),
            importance: Some(&cmd.importance),
            ..Flags::default()
        },
        TrainArgs::default(),
    )?;
    let config = ImportanceConfig {
        model: cmd.model.clone(),
        model_sha256: file_sha256(&cmd.model)?,
        data: DataSource::resolve(&layers.data, &layers.generator)?,
        rows: match &cmd.rows_from {
            Some(p) => RowSource::TrainReport {
                path: p.clone(),
                sha256: file_sha256(p)?,
            },
            None => RowSource::CompleteForModel,
        },
        repeats: layers.importance.repeats.unwrap_or(10),
        top_k: layers.importance.top_k.unwrap_or(20),
        seed: layers.importance.importance_seed.unwrap_or(0),
    };
    if config.repeats == 0 {
        return Err(CliError::validation("--repeats must be at least 1"));
    }

    let model = SavedModel::load(&config.model)?;
    let ds = config.data.load()?;
    let columns = model.bind(&ds)?;
    let rows: Vec<usize> = match &config.rows {
        RowSource::CompleteForModel => ds.complete_rows_for(&columns),
        RowSource::TrainReport { path, .. } => {
            let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            let report: TrainReport = serde_json::from_str(&text)?;
            let mut rows = Vec::with_capacity(report.test_row_numbers.len());
            for n in report.test_row_numbers {
                if n == 0 || n > ds.n_rows() {
                    return Err(CliError::validation(format!(
                        "row {n} in {} is outside the dataset (1..={})",
                        path.display(),
                        ds.n_rows()
                    )));
                }
                rows.push(n - 1);
            }
            rows
        }
    };
    let x = ds.matrix(&rows, &columns)?;
    let labels: Vec<u8> = rows.iter().map(|&r| ds.label(r)).collect();
    let names = model.input_feature_names();
    let mut rng = stream(derive_seed(config.seed, tags::IMPORTANCE));
    let score = |m: &gapnet::numerics::Matrix| model.score_raw(m);
    let report = importance_report(&score, &x, &labels, &names, config.repeats, &mut rng)?;

    let mut out = OutputDir::create(&cmd.output_args.out_dir)?;
    let manifest = RunManifest::new(
        "importance",
        &config,
        Execution {
            jobs: 1,
            out_dir: out.root().to_path_buf(),
        },
        started,
    )?;
    let output = ImportanceOutput {
        header: ReportHeader::of(&manifest),
        model: model.name.clone(),
        rows: rows.len(),
        baseline_auc: report.baseline_auc,
        repeats: report.repeats,
        top_k: config.top_k,
        top: report.top(config.top_k).into_iter().cloned().collect(),
        features: report.features.clone(),
    };
    let mut table = Table::new(&[
        "rank",
        "feature",
        "column",
        "mean_drop",
        "std_drop",
        "constant",
    ]);
    for f in &output.top {
        table.row(&[
            f.rank.to_string(),
            f.name.clone(),
            f.column.to_string(),
            num(f.mean_drop),
            num(f.std_drop),
            f.constant.to_string(),
        ]);
    }
    out.write_bytes(IMPORTANCE_CSV, &table.into_bytes())?;
    out.write_json(IMPORTANCE_JSON, &output)?;
    out.finish(manifest)?;
    print_json(&output)?;
    Ok(output)
}
