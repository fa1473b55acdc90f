use gapnet::clustering::{
    merge_clusters_traced, plan_to_toml, signature_clusters, validate_plan, ClusterPlan,
    CoverageReport, MergeStep,
};
use serde::Serialize;

use super::{layer, print_json, Flags};
use crate::args::{ClustersCmd, TrainArgs};
use crate::config::{DataSource, PlanSource};
use crate::error::{io_error, CliError, CliResult};
use crate::manifest::{now_ms, Execution, ReportHeader, RunManifest};
use crate::output::OutputDir;

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ClustersConfig {
    pub data: DataSource,
    pub plan: PlanSource,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClustersReport {
    pub header: ReportHeader,
    pub rows: usize,
    pub features: usize,
    pub complete_rows: usize,
    pub coverage: CoverageReport,
    pub uncovered_feature_names: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub merge_steps: Vec<MergeStep>,
    pub valid: bool,
    pub violations: Vec<String>,
}

pub fn run(cmd: &ClustersCmd) -> CliResult<ClustersReport> {
    let started = now_ms();
    let layers = layer(
        &cmd.output_args,
        Flags {
            data: Some(&cmd.data),
            generator: Some(&cmd.generator),
            plan: Some(&cmd.plan),
            ..Flags::default()
        },
        TrainArgs::default(),
    )?;
    let config = ClustersConfig {
        data: DataSource::resolve(&layers.data, &layers.generator)?,
        plan: PlanSource::resolve(&layers.plan)?,
    };
    let ds = config.data.load()?;

    let (plan, steps) = match &config.plan {
        PlanSource::File { path, .. } => {
            let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            let clusters = gapnet::clustering::parse_plan(&text, ds.feature_names())?;
            (ClusterPlan::from_clusters(&ds, clusters)?, Vec::new())
        }
        PlanSource::Signatures { min_support: None } => (signature_clusters(&ds), Vec::new()),
        PlanSource::Signatures {
            min_support: Some(m),
        } => merge_clusters_traced(&signature_clusters(&ds), &ds, *m)?,
    };
    let coverage = validate_plan(&plan, &ds, None);

    let mut out = OutputDir::create(&cmd.output_args.out_dir)?;
    let manifest = RunManifest::new(
        "clusters",
        &config,
        Execution {
            jobs: 1,
            out_dir: out.root().to_path_buf(),
        },
        started,
    )?;
    let report = ClustersReport {
        header: ReportHeader::of(&manifest),
        rows: ds.n_rows(),
        features: ds.n_features(),
        complete_rows: ds.complete_rows().len(),
        uncovered_feature_names: coverage
            .uncovered_features
            .iter()
            .map(|&i| ds.feature_names()[i].clone())
            .collect(),
        merge_steps: steps,
        valid: coverage.is_valid(),
        violations: coverage.violations(),
        coverage,
    };
    out.write_json("clusters.json", &report)?;
    if let Some(path) = &cmd.write_plan {
        std::fs::write(path, plan_to_toml(&plan, ds.feature_names()))
            .map_err(|e| io_error(path, e))?;
        out.record(&path.display().to_string());
    }
    out.finish(manifest)?;
    print_json(&report)?;
    if !report.valid {
        return Err(
            CliError::validation("cluster plan is invalid").with_details(report.violations.clone())
        );
    }
    Ok(report)
}
