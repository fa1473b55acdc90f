use rand::seq::SliceRandom;
use rand::RngCore;

use super::model::{Body, FeatureNet, GapNetModel};
use super::{build_subnet, build_vanilla, TrainConfig};
use crate::clustering::{ClusterPlan, FeatureCluster};
use crate::dataset::{DataSplit, GappedDataset};
use crate::error::{Error, Result};
use crate::numerics::{
    bce_loss, fit, logit_gradient, Activation, AdamState, DenseLayer, FitHistory, ForwardPass,
    Matrix, Mode,
};
use crate::rng::{derive_seed, stream, tags};

#[derive(Debug, Clone)]
pub struct TrainedSubnet {
    pub cluster: FeatureCluster,
    pub model: FeatureNet,
    pub train_rows: Vec<usize>,
    pub history: FitHistory,
}

/// Baseline: all features, trained on complete rows outside the test set.
pub fn train_vanilla(
    ds: &GappedDataset,
    split: &DataSplit,
    cfg: &TrainConfig,
) -> Result<(FeatureNet, Vec<usize>, FitHistory)> {
    cfg.validate()?;
    let rows = split.exclude_test(&ds.complete_rows());
    if rows.is_empty() {
        return Err(Error::Training(
            "no complete training rows for the vanilla network".into(),
        ));
    }
    let features: Vec<usize> = (0..ds.n_features()).collect();
    let mut rng = stream(derive_seed(cfg.seed, tags::VANILLA));
    let mut net = build_vanilla(
        features.len(),
        cfg.hidden_multiplier,
        cfg.dropout_rate,
        &mut rng,
    )?;
    let x = ds.matrix(&rows, &features)?;
    let history = fit(
        &mut net,
        &x,
        &ds.targets(&rows),
        &cfg.fit_config(),
        &mut rng,
    )?;
    Ok((FeatureNet::new(features, net)?, rows, history))
}

/// Stage I: one network per cluster, each trained on the rows complete for
/// its cluster minus the shared test rows.
pub fn train_stage1(
    ds: &GappedDataset,
    plan: &ClusterPlan,
    split: &DataSplit,
    cfg: &TrainConfig,
) -> Result<Vec<TrainedSubnet>> {
    cfg.validate()?;
    if plan.clusters.is_empty() {
        return Err(Error::invalid("cluster plan is empty"));
    }
    plan.clusters
        .iter()
        .enumerate()
        .map(|(i, cluster)| {
            let rows = split.exclude_test(&ds.complete_rows_for(&cluster.features));
            if rows.is_empty() {
                return Err(Error::Training(format!(
                    "cluster '{}' has no training rows after holding out the test set",
                    cluster.name
                )));
            }
            let mut rng = stream(derive_seed(cfg.seed, tags::SUBNET_BASE + i as u64));
            let mut net = build_subnet(cluster, cfg.hidden_multiplier, cfg.dropout_rate, &mut rng)?;
            let x = ds.matrix(&rows, &cluster.features)?;
            let history = fit(
                &mut net,
                &x,
                &ds.targets(&rows),
                &cfg.fit_config(),
                &mut rng,
            )?;
            Ok(TrainedSubnet {
                cluster: cluster.clone(),
                model: FeatureNet::new(cluster.features.clone(), net)?,
                train_rows: rows,
                history,
            })
        })
        .collect()
}

/// Drops each sub-network's output head and attaches a fresh sigmoid node
/// (Glorot weights, zero bias) over the concatenated last hidden layers.
pub fn fuse(
    subnets: &[TrainedSubnet],
    freeze_bodies: bool,
    rng: &mut dyn RngCore,
) -> Result<GapNetModel> {
    if subnets.is_empty() {
        return Err(Error::invalid("nothing to fuse"));
    }
    let bodies = subnets
        .iter()
        .map(|s| {
            let mut net = s.model.net.without_head()?;
            net.set_trainable(!freeze_bodies);
            Ok(Body {
                cluster: s.cluster.clone(),
                net,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let width: usize = bodies.iter().map(|b| b.net.output_width()).sum();
    let fusion = DenseLayer::glorot(width, 1, Activation::Sigmoid, rng)?;
    let model = GapNetModel {
        bodies,
        fusion,
        freeze_bodies,
    };
    model.validate()?;
    Ok(model)
}

#[derive(Debug, Clone)]
pub struct Stage2Outcome {
    pub model: GapNetModel,
    pub train_rows: Vec<usize>,
    pub history: FitHistory,
}

/// Stage II: trains the fusion node (and the bodies when they are not
/// frozen) on fully complete rows outside the test set. Body dropout stays
/// active during training.
pub fn train_stage2(
    mut model: GapNetModel,
    ds: &GappedDataset,
    split: &DataSplit,
    cfg: &TrainConfig,
    rng: &mut dyn RngCore,
) -> Result<Stage2Outcome> {
    cfg.validate()?;
    model.validate()?;
    let rows = split.exclude_test(&ds.complete_rows());
    if rows.is_empty() {
        return Err(Error::Training(
            "no complete training rows for stage II".into(),
        ));
    }
    let inputs: Vec<Matrix> = model
        .bodies
        .iter()
        .map(|b| ds.matrix(&rows, &b.cluster.features))
        .collect::<Result<_>>()?;
    let y = ds.targets(&rows);

    let train_bodies = !model.freeze_bodies;
    let mut params = flat_trainable(&model, train_bodies);
    let mut adam = AdamState::new(cfg.adam(), params.len())?;
    let mut grad = Vec::with_capacity(params.len());
    let n = rows.len();
    let batch = cfg.batch_size.unwrap_or(n).min(n);
    let full_batch = batch == n;
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = FitHistory::default();

    for _ in 0..cfg.epochs {
        if !full_batch {
            order.shuffle(rng);
        }
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch) {
            let (bx, by): (Vec<Matrix>, Vec<f64>);
            let (xs, yb): (&[Matrix], &[f64]) = if full_batch {
                (&inputs, &y)
            } else {
                bx = inputs.iter().map(|x| x.select_rows(chunk)).collect();
                by = chunk.iter().map(|&i| y[i]).collect();
                (&bx, &by)
            };
            let loss = fused_gradient(&model, xs, yb, Mode::Train, rng, train_bodies, &mut grad)?;
            epoch_loss += loss * yb.len() as f64;
            adam.step(&mut params, &grad)?;
            load_trainable(&mut model, &params, train_bodies)?;
        }
        history.losses.push(epoch_loss / n as f64);
    }
    history.updates = adam.step_count();
    Ok(Stage2Outcome {
        model,
        train_rows: rows,
        history,
    })
}

/// Mean BCE of the fused model on one batch and its gradient, written to
/// `grad` as fusion weights, fusion bias, then (when `with_bodies`) each
/// body's flattened parameters in body order. `inputs` holds one matrix per
/// body, laid out over that body's cluster.
pub fn fused_gradient(
    model: &GapNetModel,
    inputs: &[Matrix],
    labels: &[f64],
    mode: Mode,
    rng: &mut dyn RngCore,
    with_bodies: bool,
    grad: &mut Vec<f64>,
) -> Result<f64> {
    if inputs.len() != model.bodies.len() {
        return Err(Error::Dimension {
            context: "body input matrices",
            expected: model.bodies.len(),
            actual: inputs.len(),
        });
    }
    let passes: Vec<ForwardPass> = model
        .bodies
        .iter()
        .zip(inputs)
        .map(|(b, x)| b.net.forward(x, mode, rng))
        .collect::<Result<_>>()?;
    let h = Matrix::hstack(&passes.iter().map(ForwardPass::output).collect::<Vec<_>>())?;
    let scores = model.fusion.activate(&model.fusion.affine(&h)?).column(0);
    let loss = bce_loss(&scores, labels)?;
    let d_logits = logit_gradient(&scores, labels)?;

    grad.clear();
    grad.extend_from_slice(h.t_matmul(&d_logits)?.as_slice());
    grad.push(d_logits.as_slice().iter().sum());
    if with_bodies {
        let d_h = d_logits.matmul_t(&model.fusion.weights)?;
        let mut offset = 0;
        for (b, pass) in model.bodies.iter().zip(&passes) {
            let w = b.net.output_width();
            let block = d_h.column_block(offset, w);
            offset += w;
            let (g, _) = b.net.backward_from_output(pass, &block, false)?;
            g.flatten_into(grad);
        }
    }
    Ok(loss)
}

fn flat_trainable(model: &GapNetModel, with_bodies: bool) -> Vec<f64> {
    let mut p = model.fusion.weights.as_slice().to_vec();
    p.extend_from_slice(&model.fusion.biases);
    if with_bodies {
        for b in &model.bodies {
            b.net.flat_params_into(&mut p);
        }
    }
    p
}

fn load_trainable(model: &mut GapNetModel, params: &[f64], with_bodies: bool) -> Result<()> {
    let nw = model.fusion.weights.as_slice().len();
    model
        .fusion
        .weights
        .as_mut_slice()
        .copy_from_slice(&params[..nw]);
    model.fusion.biases[0] = params[nw];
    if with_bodies {
        let mut offset = nw + 1;
        for b in &mut model.bodies {
            offset += b.net.load_flat_params(&params[offset..])?;
        }
    }
    Ok(())
}
