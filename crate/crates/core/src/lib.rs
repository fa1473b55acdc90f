//! GapNet: two-stage neural-network training for binary classification on
//! tabular data with large blocks of missing values.
//!
//! Features are grouped into clusters that share jointly complete rows
//! ([`clustering`]). Stage I trains one small network per cluster on every
//! row complete for that cluster; stage II joins the trained hidden layers
//! behind a single sigmoid node and fits it on the fully complete rows
//! ([`gapnet`]). [`eval`] holds the evaluation protocol (ROC/AUC, DeLong,
//! threshold metrics, permutation importance) and [`synth`] the Madelon-style
//! benchmark with block missingness.

pub mod clustering;
pub mod dataset;
mod error;
pub mod eval;
pub mod gapnet;
pub mod numerics;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
