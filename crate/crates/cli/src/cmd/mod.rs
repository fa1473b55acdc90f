pub mod benchmark;
pub mod clusters;
pub mod importance;
pub mod synth;
pub mod train;

use std::io::Write;

use serde::Serialize;

use crate::args::layered;
use crate::args::{
    BenchmarkArgs, ConfigFile, DataArgs, GeneratorArgs, ImportanceArgs, OutputArgs, PlanArgs,
    SplitArgs, TrainArgs,
};
use crate::error::CliResult;

/// Flag groups after applying the config file underneath the flags.
pub struct Layers {
    pub data: DataArgs,
    pub generator: GeneratorArgs,
    pub plan: PlanArgs,
    pub train: TrainArgs,
    pub split: SplitArgs,
    pub bench: BenchmarkArgs,
    pub importance: ImportanceArgs,
}

#[derive(Default)]
pub struct Flags<'a> {
    pub data: Option<&'a DataArgs>,
    pub generator: Option<&'a GeneratorArgs>,
    pub plan: Option<&'a PlanArgs>,
    pub train: Option<&'a TrainArgs>,
    pub split: Option<&'a SplitArgs>,
    pub bench: Option<&'a BenchmarkArgs>,
    pub importance: Option<&'a ImportanceArgs>,
}

/// `train_base` is the preset layer for training flags.
pub fn layer(out: &OutputArgs, flags: Flags<'_>, train_base: TrainArgs) -> CliResult<Layers> {
    let file = ConfigFile::load(out.config.as_ref())?;
    let empty = Layers {
        data: DataArgs::default(),
        generator: GeneratorArgs::default(),
        plan: PlanArgs::default(),
        train: TrainArgs::default(),
        split: SplitArgs::default(),
        bench: BenchmarkArgs::default(),
        importance: ImportanceArgs::default(),
    };
    Ok(Layers {
        data: layered(
            empty.data,
            file.data.as_ref(),
            flags.data.unwrap_or(&DataArgs::default()),
            DataArgs::overlay,
        ),
        generator: layered(
            empty.generator,
            file.generator.as_ref(),
            flags.generator.unwrap_or(&GeneratorArgs::default()),
            GeneratorArgs::overlay,
        ),
        plan: layered(
            empty.plan,
            file.plan.as_ref(),
            flags.plan.unwrap_or(&PlanArgs::default()),
            PlanArgs::overlay,
        ),
        train: layered(
            train_base,
            file.train.as_ref(),
            flags.train.unwrap_or(&TrainArgs::default()),
            TrainArgs::overlay,
        ),
        split: layered(
            empty.split,
            file.split.as_ref(),
            flags.split.unwrap_or(&SplitArgs::default()),
            SplitArgs::overlay,
        ),
        bench: layered(
            empty.bench,
            file.benchmark.as_ref(),
            flags.bench.unwrap_or(&BenchmarkArgs::default()),
            BenchmarkArgs::overlay,
        ),
        importance: layered(
            empty.importance,
            file.importance.as_ref(),
            flags.importance.unwrap_or(&ImportanceArgs::default()),
            ImportanceArgs::overlay,
        ),
    })
}

/// Prints a value as pretty JSON on stdout. A closed pipe is not an error.
pub fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)?;
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(crate::error::CliError::runtime(format!("stdout: {e}")))
        }
        _ => Ok(()),
    }
}

/// File-system-safe version of a model name.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
