use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::config_hash;
use crate::error::{io_error, CliError, CliResult};

pub const MANIFEST_FORMAT: &str = "gapnet-manifest";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSeed {
    pub run: usize,
    pub seed: u64,
    pub split_seed: u64,
}

/// Settings that affect scheduling but never results.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Execution {
    pub jobs: usize,
    pub out_dir: PathBuf,
}

/// Everything needed to reproduce a command's reports. The `config` block
/// is the resolved configuration; its hash is embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub library_version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub config_hash: String,
    pub run_seeds: Vec<RunSeed>,
    /// Paths relative to the output directory.
    pub artifacts: Vec<String>,
    pub execution: Execution,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

pub fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

impl RunManifest {
    pub fn new<T: Serialize>(
        command: &str,
        config: &T,
        execution: Execution,
        started: u128,
    ) -> CliResult<Self> {
        Ok(RunManifest {
            format: MANIFEST_FORMAT.into(),
            library_version: gapnet::VERSION.into(),
            command: command.into(),
            config: serde_json::to_value(config)?,
            config_hash: config_hash(config)?,
            run_seeds: Vec::new(),
            artifacts: Vec::new(),
            execution,
            started_unix_ms: started,
            finished_unix_ms: started,
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let m: RunManifest = serde_json::from_str(&text)?;
        if m.format != MANIFEST_FORMAT {
            return Err(CliError::validation(format!(
                "{} is not a manifest",
                path.display()
            )));
        }
        Ok(m)
    }

    /// The recorded configuration, checked against its hash.
    pub fn config_for<T: for<'de> Deserialize<'de> + Serialize>(
        &self,
        command: &str,
    ) -> CliResult<T> {
        if self.command != command {
            return Err(CliError::validation(format!(
                "manifest was written by '{}', not '{command}'",
                self.command
            )));
        }
        let cfg: T = serde_json::from_value(self.config.clone())?;
        if config_hash(&cfg)? != self.config_hash {
            return Err(CliError::validation(
                "manifest config does not match its recorded hash",
            ));
        }
        Ok(cfg)
    }
}

/// Header embedded in every report: ties it to exactly one manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub library_version: String,
    pub command: String,
    pub config_hash: String,
    pub manifest: String,
}

impl ReportHeader {
    pub fn of(manifest: &RunManifest) -> Self {
        ReportHeader {
            library_version: manifest.library_version.clone(),
            command: manifest.command.clone(),
            config_hash: manifest.config_hash.clone(),
            manifest: MANIFEST_FILE.into(),
        }
    }
}
