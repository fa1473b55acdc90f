use gapnet::dataset::{save_csv, CsvOptions};
use gapnet::synth::MadelonConfig;
use serde::Serialize;

use super::{layer, print_json, Flags};
use crate::args::{GeneratorArgs, SynthCmd, TrainArgs};
use crate::config::{madelon_config, synthesize};
use crate::error::CliResult;
use crate::manifest::{now_ms, Execution, RunManifest};
use crate::output::OutputDir;

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SynthConfig {
    pub generator: MadelonConfig,
    pub gaps: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthSummary {
    pub output: String,
    pub rows: usize,
    pub features: usize,
    pub complete_rows: usize,
    pub missing_cells: usize,
    pub positives: usize,
    pub config_hash: String,
}

/// The benchmark generator's settings as a flag layer.
fn preset_generator() -> GeneratorArgs {
    let d = MadelonConfig::default();
    GeneratorArgs {
        data_seed: None,
        n_samples: Some(d.n_samples),
        class_separation: Some(d.class_separation),
        clusters_per_class: Some(d.clusters_per_class),
        random_covariance: Some(d.random_covariance),
        gaps: Some(true),
    }
}

pub fn run(cmd: &SynthCmd) -> CliResult<SynthSummary> {
    let started = now_ms();
    let mut flags = cmd.generator.clone();
    if cmd.no_gaps {
        flags.gaps = Some(false);
    }
    let mut layers = layer(
        &cmd.output_args,
        Flags {
            generator: Some(&flags),
            ..Flags::default()
        },
        TrainArgs::default(),
    )?;
    if cmd.paper_madelon {
        let mut g = preset_generator();
        g.overlay(&layers.generator);
        layers.generator = g;
    }
    let config = SynthConfig {
        generator: madelon_config(&layers.generator),
        gaps: layers.generator.gaps.unwrap_or(true),
    };
    let ds = synthesize(&config.generator, config.gaps)?;

    let mut out = OutputDir::create(&cmd.output_args.out_dir)?;
    let path = match &cmd.output {
        Some(p) => p.clone(),
        None => out.path("madelon.csv"),
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| crate::error::io_error(parent, e))?;
    }
    save_csv(&ds, &path, &CsvOptions::default())?;
    out.record(&path.display().to_string());

    let manifest = RunManifest::new(
        "synth",
        &config,
        Execution {
            jobs: 1,
            out_dir: out.root().to_path_buf(),
        },
        started,
    )?;
    let summary = SynthSummary {
        output: path.display().to_string(),
        rows: ds.n_rows(),
        features: ds.n_features(),
        complete_rows: ds.complete_rows().len(),
        missing_cells: ds.present_mask().iter().filter(|p| !**p).count(),
        positives: ds.labels().iter().filter(|&&y| y == 1).count(),
        config_hash: manifest.config_hash.clone(),
    };
    out.finish(manifest)?;
    print_json(&summary)?;
    Ok(summary)
}
