//! Flags and the config file that mirrors them.
//!
//! Every flag group is also a table in the TOML config file, with keys equal
//! to the long flag names (underscores for dashes):
//!
//! ```toml
//! [data]
//! paper_madelon = true
//!
//! [train]
//! epochs = 500
//!
//! [benchmark]
//! runs = 20
//! ```
//!
//! Precedence, lowest first: built-in defaults, presets, config file, flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

macro_rules! overlay {
    ($ty:ty { $($field:ident),* $(,)? }) => {
        impl $ty {
            /// Copies every field set in `other` over `self`.
            pub fn overlay(&mut self, other: &$ty) {
                $(
                    if other.$field.is_some() {
                        self.$field = other.$field.clone();
                    }
                )*
            }
        }
    };
}

#[derive(Debug, Parser)]
#[command(
    name = "gapnet",
    version,
    about = "Train and benchmark GapNet models on block-missing tabular data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the synthetic Madelon-style dataset as CSV.
    Synth(SynthCmd),
    /// Detect or validate feature clusters.
    Clusters(ClustersCmd),
    /// Train on one split, save the models and report test metrics.
    Train(TrainCmd),
    /// Repeat train/test over resampled splits and aggregate.
    Benchmark(BenchmarkCmd),
    /// Permutation feature importance of a saved model.
    Importance(ImportanceCmd),
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// Directory for reports and artifacts.
    #[arg(long, env = "GAPNET_OUT_DIR", default_value = "gapnet-out")]
    pub out_dir: PathBuf,
    /// TOML config file mirroring the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataArgs {
    /// Input CSV with a label column.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Use the generated Madelon benchmark with its block missingness.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub paper_madelon: Option<bool>,
    /// Cell text read as missing, besides the empty string.
    #[arg(long)]
    pub missing_token: Option<String>,
    #[arg(long)]
    pub label_column: Option<String>,
}
overlay!(DataArgs {
    data,
    paper_madelon,
    missing_token,
    label_column
});

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorArgs {
    /// Seed of the synthetic data generator.
    #[arg(long)]
    pub data_seed: Option<u64>,
    #[arg(long)]
    pub n_samples: Option<usize>,
    #[arg(long)]
    pub class_separation: Option<f64>,
    #[arg(long)]
    pub clusters_per_class: Option<usize>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub random_covariance: Option<bool>,
    /// Apply the block-missingness pattern.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub gaps: Option<bool>,
}
overlay!(GeneratorArgs {
    data_seed,
    n_samples,
    class_separation,
    clusters_per_class,
    random_covariance,
    gaps
});

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanArgs {
    /// TOML plan file; overrides automatic cluster detection.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Greedily merge detected clusters while each keeps this many complete rows.
    #[arg(long)]
    pub min_support: Option<usize>,
}
overlay!(PlanArgs { plan, min_support });

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainArgs {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub adam_epsilon: Option<f64>,
    /// Mini-batch size; full batch when unset.
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub dropout_rate: Option<f64>,
    #[arg(long)]
    pub hidden_multiplier: Option<usize>,
    /// Keep stage-I bodies fixed during stage II.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub freeze_bodies: Option<bool>,
    /// z-score features with training-row statistics.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub standardize: Option<bool>,
    /// Also train the fused model with the opposite freeze setting.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub compare_freeze_modes: Option<bool>,
}
overlay!(TrainArgs {
    epochs,
    learning_rate,
    beta1,
    beta2,
    adam_epsilon,
    batch_size,
    dropout_rate,
    hidden_multiplier,
    freeze_bodies,
    standardize,
    compare_freeze_modes,
});

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitArgs {
    /// Seed for splits and weight initialization.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fraction of complete rows held out for testing.
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub stratified: Option<bool>,
}
overlay!(SplitArgs {
    seed,
    test_fraction,
    stratified
});

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub runs: Option<usize>,
    /// Width of the AUC histogram bins.
    #[arg(long)]
    pub bin_width: Option<f64>,
    /// Repetitions trained concurrently. Results do not depend on it.
    #[arg(long)]
    pub jobs: Option<usize>,
}
overlay!(BenchmarkArgs {
    runs,
    bin_width,
    jobs
});

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImportanceArgs {
    /// Permutations per feature.
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub importance_seed: Option<u64>,
}
overlay!(ImportanceArgs {
    repeats,
    top_k,
    importance_seed
});

/// The TOML config file: one optional table per flag group.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub data: Option<DataArgs>,
    pub generator: Option<GeneratorArgs>,
    pub plan: Option<PlanArgs>,
    pub train: Option<TrainArgs>,
    pub split: Option<SplitArgs>,
    pub benchmark: Option<BenchmarkArgs>,
    pub importance: Option<ImportanceArgs>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::validation(format!("config file: {e}")))
    }

    pub fn load(path: Option<&PathBuf>) -> CliResult<Self> {
        match path {
            None => Ok(ConfigFile::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| crate::error::io_error(p, e))?;
                ConfigFile::parse(&text)
            }
        }
    }
}

/// Layers `file` then `flags` over `base`.
pub fn layered<T: Clone>(base: T, file: Option<&T>, flags: &T, overlay: fn(&mut T, &T)) -> T {
    let mut out = base;
    if let Some(f) = file {
        overlay(&mut out, f);
    }
    overlay(&mut out, flags);
    out
}

#[derive(Debug, Args)]
pub struct SynthCmd {
    /// Output CSV (default: <out-dir>/madelon.csv).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Preset: the benchmark's generator settings and gap pattern.
    #[arg(long)]
    pub paper_madelon: bool,
    /// Write a fully complete dataset.
    #[arg(long)]
    pub no_gaps: bool,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[command(flatten)]
    pub output_args: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ClustersCmd {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Also write the resulting plan as TOML.
    #[arg(long)]
    pub write_plan: Option<PathBuf>,
    #[command(flatten)]
    pub output_args: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Vanilla,
    Gapnet,
    Both,
}

#[derive(Debug, Args)]
pub struct TrainCmd {
    #[arg(long, value_enum, default_value = "both")]
    pub model: ModelChoice,
    /// Preset: every training number stated for the benchmark.
    #[arg(long)]
    pub paper_epochs: bool,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub output_args: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BenchmarkCmd {
    /// Preset: every training number stated for the benchmark.
    #[arg(long)]
    pub paper_epochs: bool,
    /// Replay the configuration recorded in a manifest.
    #[arg(long, conflicts_with = "config")]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub bench: BenchmarkArgs,
    #[command(flatten)]
    pub output_args: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ImportanceCmd {
    /// Saved model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Score only the test rows listed in this train report.
    #[arg(long)]
    pub rows_from: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[command(flatten)]
    pub importance: ImportanceArgs,
    #[command(flatten)]
    pub output_args: OutputArgs,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn config_file_mirrors_flags() {
        let cfg = ConfigFile::parse(
            r#"
            [data]
            paper_madelon = true
            [train]
            epochs = 7
            freeze_bodies = false
            [benchmark]
            runs = 3
            "#,
        )
        .unwrap();
        assert_eq!(cfg.train.as_ref().unwrap().epochs, Some(7));
        assert_eq!(cfg.data.as_ref().unwrap().paper_madelon, Some(true));
        assert!(ConfigFile::parse("[train]\nepoch = 3").is_err());
        assert!(ConfigFile::parse("[trian]\nepochs = 3").is_err());
    }

    #[test]
    fn flags_beat_file_beat_base() {
        let base = TrainArgs {
            epochs: Some(2000),
            dropout_rate: Some(0.5),
            learning_rate: Some(1e-3),
            ..TrainArgs::default()
        };
        let file = TrainArgs {
            epochs: Some(50),
            dropout_rate: Some(0.2),
            ..TrainArgs::default()
        };
        let flags = TrainArgs {
            epochs: Some(5),
            ..TrainArgs::default()
        };
        let out = layered(base, Some(&file), &flags, TrainArgs::overlay);
        assert_eq!(out.epochs, Some(5));
        assert_eq!(out.dropout_rate, Some(0.2));
        assert_eq!(out.learning_rate, Some(1e-3));
    }

    #[test]
    fn boolean_flags_accept_bare_and_valued_forms() {
        let cli = Cli::try_parse_from([
            "gapnet",
            "train",
            "--paper-madelon",
            "--freeze-bodies",
            "false",
        ])
        .unwrap();
        let Command::Train(t) = cli.command else {
            panic!()
        };
        assert_eq!(t.data.paper_madelon, Some(true));
        assert_eq!(t.train.freeze_bodies, Some(false));
    }
}
