//! Evaluation: ROC/AUC, threshold metrics, the DeLong test, permutation
//! importance and aggregation over repeated splits.

mod aggregate;
mod confusion;
mod delong;
mod importance;
mod roc;
pub mod stats;

pub use aggregate::{
    aggregate_runs, auc_histogram, fpr_grid, HistogramBin, RunAggregate, DEFAULT_BIN_WIDTH,
    FPR_GRID_POINTS,
};
pub use confusion::{confusion_at, metrics, ConfusionCounts, MetricReport};
pub use delong::{delong_test, structural_components, DelongResult};
pub use importance::{
    importance_report, permutation_drops_with, permutation_importance, FeatureImportance,
    ImportanceReport, ScoreFn,
};
pub use roc::{auc, roc_curve, RocCurve, RocPoint};
