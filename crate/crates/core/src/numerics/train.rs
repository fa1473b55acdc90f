use rand::seq::SliceRandom;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{bce_loss, AdamConfig, AdamState, ForwardPass, Gradients, Matrix, Mlp, Mode};
use crate::error::{Error, Result};

/// Gradients of mean BCE for a single-sigmoid-output network, given a
/// forward pass already run with the masks to differentiate through.
pub fn backprop(net: &Mlp, pass: &ForwardPass, labels: &[f64]) -> Result<Gradients> {
    if !net.is_classifier() {
        return Err(Error::config(
            "backprop with BCE needs a single sigmoid output node",
        ));
    }
    let n = pass.input().rows();
    if labels.len() != n {
        return Err(Error::Dimension {
            context: "labels vs batch rows",
            expected: n,
            actual: labels.len(),
        });
    }
    let d_logits = logit_gradient(&pass.scores(), labels)?;
    Ok(net.backward_from_logits(pass, d_logits, false)?.0)
}

/// `(score - label) / n` as an `n × 1` matrix.
pub fn logit_gradient(scores: &[f64], labels: &[f64]) -> Result<Matrix> {
    let n = scores.len() as f64;
    Matrix::from_vec(
        scores.len(),
        1,
        scores
            .iter()
            .zip(labels)
            .map(|(s, y)| (s - y) / n)
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub epochs: usize,
    pub adam: AdamConfig,
    /// `None` trains full-batch.
    pub batch_size: Option<usize>,
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config("epochs must be >= 1"));
        }
        if self.batch_size == Some(0) {
            return Err(Error::config("batch size must be >= 1"));
        }
        self.adam.validate()
    }
}

/// Per-epoch mean training loss (train mode, so dropout noise is included).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitHistory {
    pub losses: Vec<f64>,
    pub updates: u64,
}

/// Trains a classifier with BCE and Adam. Only trainable layers move.
pub fn fit(
    net: &mut Mlp,
    x: &Matrix,
    y: &[f64],
    cfg: &FitConfig,
    rng: &mut dyn RngCore,
) -> Result<FitHistory> {
    cfg.validate()?;
    if x.rows() == 0 {
        return Err(Error::Training("no training rows".into()));
    }
    if y.len() != x.rows() {
        return Err(Error::Dimension {
            context: "labels vs training rows",
            expected: x.rows(),
            actual: y.len(),
        });
    }
    let mut adam = AdamState::new(cfg.adam, net.param_count())?;
    let mut params = net.flat_params();
    let mut flat_grad = Vec::with_capacity(params.len());
    let mut history = FitHistory::default();
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let batch = cfg.batch_size.unwrap_or(x.rows()).min(x.rows());
    let full_batch = batch == x.rows();
    for _ in 0..cfg.epochs {
        if !full_batch {
            order.shuffle(rng);
        }
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch) {
            let (bx, by);
            let (xb, yb): (&Matrix, &[f64]) = if full_batch {
                (x, y)
            } else {
                bx = x.select_rows(chunk);
                by = chunk.iter().map(|&i| y[i]).collect::<Vec<_>>();
                (&bx, &by)
            };
            let pass = net.forward(xb, Mode::Train, rng)?;
            epoch_loss += bce_loss(&pass.scores(), yb)? * yb.len() as f64;
            let grads = backprop(net, &pass, yb)?;
            flat_grad.clear();
            grads.flatten_into(&mut flat_grad);
            adam.step(&mut params, &flat_grad)?;
            net.load_flat_params(&params)?;
        }
        history.losses.push(epoch_loss / x.rows() as f64);
    }
    history.updates = adam.step_count();
    Ok(history)
}
