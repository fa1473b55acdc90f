//! Partitioning features into non-overlapping clusters that each have a
//! usable set of jointly complete rows.

mod plan_file;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use plan_file::{parse_plan, plan_to_toml};

use crate::dataset::{DataSplit, GappedDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureCluster {
    pub name: String,
    /// 0-based feature indices, ascending.
    pub features: Vec<usize>,
}

impl FeatureCluster {
    pub fn new(name: impl Into<String>, mut features: Vec<usize>) -> Result<Self> {
        let name = name.into();
        features.sort_unstable();
        if features.is_empty() {
            return Err(Error::invalid(format!("cluster '{name}' has no features")));
        }
        if features.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!(
                "cluster '{name}' repeats a feature"
            )));
        }
        Ok(FeatureCluster { name, features })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    fn first(&self) -> usize {
        self.features[0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterPlan {
    pub clusters: Vec<FeatureCluster>,
    /// Complete-row count per cluster, parallel to `clusters`.
    pub complete_counts: Vec<usize>,
    pub uncovered_features: Vec<usize>,
}

impl ClusterPlan {
    /// Plan from explicit clusters; counts and uncovered features are
    /// computed against `ds`. No validity checks beyond index range.
    pub fn from_clusters(ds: &GappedDataset, clusters: Vec<FeatureCluster>) -> Result<Self> {
        let f = ds.n_features();
        let mut covered = vec![false; f];
        for c in &clusters {
            for &i in &c.features {
                if i >= f {
                    return Err(Error::invalid(format!(
                        "cluster '{}' references feature index {} but dataset has {f} features",
                        c.name,
                        i + 1
                    )));
                }
                covered[i] = true;
            }
        }
        let complete_counts = clusters
            .iter()
            .map(|c| ds.complete_rows_for(&c.features).len())
            .collect();
        Ok(ClusterPlan {
            clusters,
            complete_counts,
            uncovered_features: (0..f).filter(|&i| !covered[i]).collect(),
        })
    }

    /// One cluster holding every feature.
    pub fn single(ds: &GappedDataset) -> Result<Self> {
        let all = FeatureCluster::new("all", (0..ds.n_features()).collect())?;
        ClusterPlan::from_clusters(ds, vec![all])
    }
}

/// Groups features whose presence columns are identical. Features never
/// present are left uncovered.
pub fn signature_clusters(ds: &GappedDataset) -> ClusterPlan {
    let mut groups: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
    let mut uncovered = Vec::new();
    for c in 0..ds.n_features() {
        let signature: Vec<bool> = (0..ds.n_rows()).map(|r| ds.is_present(r, c)).collect();
        if signature.iter().any(|&p| p) {
            groups.entry(signature).or_default().push(c);
        } else {
            uncovered.push(c);
        }
    }
    let mut members: Vec<Vec<usize>> = groups.into_values().collect();
    members.sort_by_key(|m| m[0]);
    let clusters = members
        .into_iter()
        .enumerate()
        .map(|(i, features)| FeatureCluster {
            name: format!("C{}", i + 1),
            features,
        })
        .collect::<Vec<_>>();
    let complete_counts = clusters
        .iter()
        .map(|c| ds.complete_rows_for(&c.features).len())
        .collect();
    ClusterPlan {
        clusters,
        complete_counts,
        uncovered_features: uncovered,
    }
}

/// One greedy merge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeStep {
    pub left: String,
    pub right: String,
    pub merged_count: usize,
}

pub fn merge_clusters(
    plan: &ClusterPlan,
    ds: &GappedDataset,
    min_support: usize,
) -> Result<ClusterPlan> {
    merge_clusters_traced(plan, ds, min_support).map(|(p, _)| p)
}

/// Greedy agglomeration: repeatedly merges the pair whose union keeps the
/// most complete rows, as long as that count is at least `min_support`.
/// Ties go to the pair with the lowest feature indices.
///
/// Clusters already below `min_support` are dropped to the uncovered set; if
/// none reaches it, the plan cannot be supported and an error lists them.
pub fn merge_clusters_traced(
    plan: &ClusterPlan,
    ds: &GappedDataset,
    min_support: usize,
) -> Result<(ClusterPlan, Vec<MergeStep>)> {
    if min_support == 0 {
        return Err(Error::config("min_support must be >= 1"));
    }
    let mut uncovered = plan.uncovered_features.clone();
    let mut live: Vec<FeatureCluster> = Vec::new();
    let mut dropped = Vec::new();
    for c in &plan.clusters {
        let count = ds.complete_rows_for(&c.features).len();
        if count >= min_support {
            live.push(c.clone());
        } else {
            dropped.push(format!("{} ({count} rows)", c.name));
            uncovered.extend(&c.features);
        }
    }
    if live.is_empty() && !plan.clusters.is_empty() {
        return Err(Error::invalid(format!(
            "min_support {min_support} exceeds the complete-row count of every cluster: {}",
            dropped.join(", ")
        )));
    }
    live.sort_by_key(FeatureCluster::first);

    let mut steps = Vec::new();
    loop {
        let mut best: Option<(usize, usize, usize)> = None;
        for i in 0..live.len() {
            for j in i + 1..live.len() {
                let union = union_features(&live[i], &live[j]);
                let count = ds.complete_rows_for(&union).len();
                if count < min_support {
                    continue;
                }
                // pairs are visited in (lowest feature, next lowest) order, so
                // strict improvement keeps the earliest pair on ties
                if best.map_or(true, |(_, _, b)| count > b) {
                    best = Some((i, j, count));
                }
            }
        }
        let Some((i, j, count)) = best else { break };
        let right = live.remove(j);
        let left = live.remove(i);
        steps.push(MergeStep {
            left: left.name.clone(),
            right: right.name.clone(),
            merged_count: count,
        });
        live.push(FeatureCluster {
            name: format!("{}+{}", left.name, right.name),
            features: union_features(&left, &right),
        });
        live.sort_by_key(FeatureCluster::first);
    }
    uncovered.sort_unstable();
    let complete_counts = live
        .iter()
        .map(|c| ds.complete_rows_for(&c.features).len())
        .collect();
    Ok((
        ClusterPlan {
            clusters: live,
            complete_counts,
            uncovered_features: uncovered,
        },
        steps,
    ))
}

fn union_features(a: &FeatureCluster, b: &FeatureCluster) -> Vec<usize> {
    let mut u: Vec<usize> = a.features.iter().chain(&b.features).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overlap {
    pub feature: usize,
    pub feature_name: String,
    pub clusters: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterCoverage {
    pub name: String,
    pub features: Vec<String>,
    pub complete_rows: usize,
    /// Complete rows outside the test set, when a split was supplied.
    pub train_rows: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub clusters: Vec<ClusterCoverage>,
    pub overlaps: Vec<Overlap>,
    pub empty_clusters: Vec<String>,
    pub empty_support: Vec<String>,
    pub out_of_range: Vec<String>,
    pub uncovered_features: Vec<usize>,
}

impl CoverageReport {
    /// Uncovered features are allowed; overlaps and unsupported clusters are not.
    pub fn is_valid(&self) -> bool {
        self.overlaps.is_empty()
            && self.empty_clusters.is_empty()
            && self.empty_support.is_empty()
            && self.out_of_range.is_empty()
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for o in &self.overlaps {
            v.push(format!(
                "feature '{}' appears in clusters {}",
                o.feature_name,
                o.clusters.join(", ")
            ));
        }
        for c in &self.empty_clusters {
            v.push(format!("cluster '{c}' has no features"));
        }
        for c in &self.empty_support {
            v.push(format!("cluster '{c}' has no complete rows"));
        }
        v.extend(self.out_of_range.iter().cloned());
        v
    }
}

pub fn validate_plan(
    plan: &ClusterPlan,
    ds: &GappedDataset,
    split: Option<&DataSplit>,
) -> CoverageReport {
    let f = ds.n_features();
    let mut owners: Vec<Vec<String>> = vec![Vec::new(); f];
    let mut out_of_range = Vec::new();
    let mut clusters = Vec::new();
    let mut empty_clusters = Vec::new();
    let mut empty_support = Vec::new();
    for c in &plan.clusters {
        let mut valid = Vec::new();
        for &i in &c.features {
            if i < f {
                owners[i].push(c.name.clone());
                valid.push(i);
            } else {
                out_of_range.push(format!(
                    "cluster '{}' references feature index {} (dataset has {f})",
                    c.name,
                    i + 1
                ));
            }
        }
        if c.features.is_empty() {
            empty_clusters.push(c.name.clone());
        }
        let rows = ds.complete_rows_for(&valid);
        if rows.is_empty() {
            empty_support.push(c.name.clone());
        }
        clusters.push(ClusterCoverage {
            name: c.name.clone(),
            features: valid
                .iter()
                .map(|&i| ds.feature_names()[i].clone())
                .collect(),
            complete_rows: rows.len(),
            train_rows: split.map(|s| s.exclude_test(&rows).len()),
        });
    }
    let overlaps = owners
        .iter()
        .enumerate()
        .filter(|(_, o)| o.len() > 1)
        .map(|(i, o)| Overlap {
            feature: i,
            feature_name: ds.feature_names()[i].clone(),
            clusters: o.clone(),
        })
        .collect();
    let uncovered_features = owners
        .iter()
        .enumerate()
        .filter(|(_, o)| o.is_empty())
        .map(|(i, _)| i)
        .collect();
    CoverageReport {
        clusters,
        overlaps,
        empty_clusters,
        empty_support,
        out_of_range,
        uncovered_features,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dataset from a column-major presence description.
    fn from_columns(columns: &[&[bool]]) -> GappedDataset {
        let n = columns[0].len();
        let f = columns.len();
        let mut present = vec![false; n * f];
        for (c, col) in columns.iter().enumerate() {
            for (r, &p) in col.iter().enumerate() {
                present[r * f + c] = p;
            }
        }
        GappedDataset::new(
            (1..=f).map(|i| format!("f{i}")).collect(),
            vec![0.0; n * f],
            present,
            (0..n).map(|r| (r % 2) as u8).collect(),
        )
        .unwrap()
    }

    #[test]
    fn complete_dataset_is_one_cluster() {
        let ds = from_columns(&[&[true; 3], &[true; 3], &[true; 3]]);
        let plan = signature_clusters(&ds);
        assert_eq!(plan.clusters.len(), 1);
        assert_eq!(plan.clusters[0].features, vec![0, 1, 2]);
        assert_eq!(plan.complete_counts, vec![3]);
    }

    #[test]
    fn identical_columns_group_together() {
        let ds = from_columns(&[
            &[true, true, false, true],
            &[true, true, false, true],
            &[false, true, true, true],
        ]);
        let plan = signature_clusters(&ds);
        let sets: Vec<Vec<usize>> = plan.clusters.iter().map(|c| c.features.clone()).collect();
        assert_eq!(sets, vec![vec![0, 1], vec![2]]);
        assert_eq!(plan.complete_counts, vec![3, 3]);
    }

    #[test]
    fn never_present_feature_is_uncovered() {
        let ds = from_columns(&[&[true, true], &[false, false]]);
        let plan = signature_clusters(&ds);
        assert_eq!(plan.uncovered_features, vec![1]);
        assert_eq!(plan.clusters.len(), 1);
    }

    #[test]
    fn fully_overlapping_clusters_merge() {
        let ds = from_columns(&[&[true, true, false], &[true, true, false]]);
        let plan = ClusterPlan::from_clusters(
            &ds,
            vec![
                FeatureCluster::new("a", vec![0]).unwrap(),
                FeatureCluster::new("b", vec![1]).unwrap(),
            ],
        )
        .unwrap();
        let merged = merge_clusters(&plan, &ds, 1).unwrap();
        assert_eq!(merged.clusters.len(), 1);
        assert_eq!(merged.complete_counts, vec![2]);
    }

    #[test]
    fn disjoint_rows_never_merge() {
        let ds = from_columns(&[&[true, true, false, false], &[false, false, true, true]]);
        let plan = signature_clusters(&ds);
        let merged = merge_clusters(&plan, &ds, 1).unwrap();
        assert_eq!(merged.clusters.len(), 2);
    }

    #[test]
    fn min_support_above_every_cluster_is_an_error() {
        let ds = from_columns(&[&[true, true, false, false], &[false, false, true, true]]);
        let plan = signature_clusters(&ds);
        let err = merge_clusters(&plan, &ds, 3).unwrap_err().to_string();
        assert!(err.contains("C1") && err.contains("C2"), "{err}");
        assert!(merge_clusters(&plan, &ds, 0).is_err());
    }

    #[test]
    fn weak_cluster_becomes_uncovered() {
        let ds = from_columns(&[&[true, true, true, false], &[false, false, false, true]]);
        let plan = signature_clusters(&ds);
        let merged = merge_clusters(&plan, &ds, 2).unwrap();
        assert_eq!(merged.clusters.len(), 1);
        assert_eq!(merged.uncovered_features, vec![1]);
    }

    #[test]
    fn validation_reports_overlap_and_omission() {
        let ds = from_columns(&[&[true; 2], &[true; 2], &[true; 2]]);
        let plan = ClusterPlan {
            clusters: vec![
                FeatureCluster::new("a", vec![0, 1]).unwrap(),
                FeatureCluster::new("b", vec![1]).unwrap(),
            ],
            complete_counts: vec![2, 2],
            uncovered_features: vec![],
        };
        let report = validate_plan(&plan, &ds, None);
        assert!(!report.is_valid());
        assert_eq!(report.overlaps.len(), 1);
        assert_eq!(report.overlaps[0].feature_name, "f2");
        assert_eq!(report.uncovered_features, vec![2]);
    }
}
