//! Plan files: a TOML list of named clusters referring to features by name.
//!
//! ```toml
//! [[cluster]]
//! name = "left"
//! features = ["x1", "x2", "x3"]
//!
//! [[cluster]]
//! name = "right"
//! features = ["x4", "x5"]
//! ```

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{ClusterPlan, FeatureCluster};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    cluster: Vec<PlanEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanEntry {
    name: String,
    features: Vec<String>,
}

/// Parses a plan and resolves feature names against `feature_names`.
/// Overlaps between clusters are not rejected here; see
/// [`validate_plan`](super::validate_plan).
pub fn parse_plan(text: &str, feature_names: &[String]) -> Result<Vec<FeatureCluster>> {
    let file: PlanFile =
        toml::from_str(text).map_err(|e| Error::Parse(format!("plan file: {e}")))?;
    if file.cluster.is_empty() {
        return Err(Error::invalid("plan file lists no clusters"));
    }
    let mut names = HashSet::new();
    let mut clusters = Vec::with_capacity(file.cluster.len());
    for entry in file.cluster {
        if entry.name.is_empty() {
            return Err(Error::invalid("plan cluster with empty name"));
        }
        if !names.insert(entry.name.clone()) {
            return Err(Error::invalid(format!(
                "cluster '{}' defined twice",
                entry.name
            )));
        }
        let indices = entry
            .features
            .iter()
            .map(|f| {
                feature_names.iter().position(|n| n == f).ok_or_else(|| {
                    Error::invalid(format!(
                        "cluster '{}' names unknown feature '{f}'",
                        entry.name
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        clusters.push(FeatureCluster::new(entry.name, indices)?);
    }
    Ok(clusters)
}

pub fn plan_to_toml(plan: &ClusterPlan, feature_names: &[String]) -> String {
    let file = PlanFile {
        cluster: plan
            .clusters
            .iter()
            .map(|c| PlanEntry {
                name: c.name.clone(),
                features: c
                    .features
                    .iter()
                    .map(|&i| feature_names[i].clone())
                    .collect(),
            })
            .collect(),
    };
    toml::to_string(&file).expect("plan serializes")
}
