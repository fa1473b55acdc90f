//! Central-difference gradient estimate, kept as an independent check on
//! [`backprop`](super::backprop).

use super::{bce_loss, Matrix, Mlp};
use crate::error::{Error, Result};

pub fn finite_diff_grad(
    net: &Mlp,
    batch: &Matrix,
    labels: &[f64],
    epsilon: f64,
) -> Result<Vec<f64>> {
    if !(1e-7..=1e-4).contains(&epsilon) {
        return Err(Error::config(format!(
            "finite-difference step must lie in [1e-7, 1e-4], got {epsilon}"
        )));
    }
    let base = net.flat_params();
    let mut probe = net.clone();
    let mut params = base.clone();
    let mut grad = Vec::with_capacity(base.len());
    let loss_at = |probe: &mut Mlp, params: &[f64]| -> Result<f64> {
        probe.load_flat_params(params)?;
        let out = probe.infer(batch)?;
        bce_loss(&out.column(0), labels)
    };
    for i in 0..base.len() {
        params[i] = base[i] + epsilon;
        let up = loss_at(&mut probe, &params)?;
        params[i] = base[i] - epsilon;
        let down = loss_at(&mut probe, &params)?;
        params[i] = base[i];
        grad.push((up - down) / (2.0 * epsilon));
    }
    Ok(grad)
}
