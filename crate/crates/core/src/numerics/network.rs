//! Feed-forward stack of dense layers with optional inverted dropout.
//!
//! The same type serves as the vanilla classifier, as a stage-I sub-network
//! and (with its output head removed) as a frozen body inside the fused model.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{Activation, DenseLayer, DropoutSpec, Matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMlp", into = "RawMlp")]
pub struct Mlp {
    input_width: usize,
    layers: Vec<DenseLayer>,
    dropout: Vec<DropoutSpec>,
    trainable: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct RawMlp {
    input_width: usize,
    layers: Vec<DenseLayer>,
    dropout: Vec<DropoutSpec>,
    trainable: Vec<bool>,
}

impl TryFrom<RawMlp> for Mlp {
    type Error = Error;

    fn try_from(raw: RawMlp) -> Result<Self> {
        let mut net = Mlp::new(raw.input_width, raw.layers, raw.dropout)?;
        if raw.trainable.len() != net.layers.len() {
            return Err(Error::Dimension {
                context: "trainable flag count",
                expected: net.layers.len(),
                actual: raw.trainable.len(),
            });
        }
        net.trainable = raw.trainable;
        Ok(net)
    }
}

impl From<Mlp> for RawMlp {
    fn from(net: Mlp) -> Self {
        RawMlp {
            input_width: net.input_width,
            layers: net.layers,
            dropout: net.dropout,
            trainable: net.trainable,
        }
    }
}

/// Everything the backward pass needs from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    input: Matrix,
    pre: Vec<Matrix>,
    /// Post-activation and, where dropout follows the layer, post-mask.
    post: Vec<Matrix>,
    masks: Vec<Option<Matrix>>,
}

impl ForwardPass {
    pub fn output(&self) -> &Matrix {
        self.post.last().expect("network has at least one layer")
    }

    pub fn input(&self) -> &Matrix {
        &self.input
    }

    pub fn masks(&self) -> &[Option<Matrix>] {
        &self.masks
    }

    /// Output column 0 as a vector of scores.
    pub fn scores(&self) -> Vec<f64> {
        self.output().column(0)
    }
}

/// Parameter gradients, laid out like the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Gradients {
            weights: net
                .layers
                .iter()
                .map(|l| Matrix::zeros(l.fan_in(), l.fan_out()))
                .collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.fan_out()]).collect(),
        }
    }

    /// Flattened in [`Mlp::flat_params`] order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.flatten_into(&mut out);
        out
    }

    pub fn flatten_into(&self, out: &mut Vec<f64>) {
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.as_slice());
            out.extend_from_slice(b);
        }
    }
}

impl Mlp {
    pub fn new(
        input_width: usize,
        layers: Vec<DenseLayer>,
        dropout: Vec<DropoutSpec>,
    ) -> Result<Self> {
        if input_width == 0 {
            return Err(Error::config("network input width must be >= 1"));
        }
        if layers.is_empty() {
            return Err(Error::config("network needs at least one layer"));
        }
        let mut width = input_width;
        for layer in &layers {
            if layer.fan_in() != width {
                return Err(Error::Dimension {
                    context: "layer chaining",
                    expected: width,
                    actual: layer.fan_in(),
                });
            }
            if layer.biases.len() != layer.fan_out() {
                return Err(Error::Dimension {
                    context: "layer bias length",
                    expected: layer.fan_out(),
                    actual: layer.biases.len(),
                });
            }
            width = layer.fan_out();
        }
        let mut seen = vec![false; layers.len()];
        for d in &dropout {
            DropoutSpec::new(d.rate, d.after_layer)?;
            if d.after_layer >= layers.len() {
                return Err(Error::config(format!(
                    "dropout placed after layer {} but network has {} layers",
                    d.after_layer,
                    layers.len()
                )));
            }
            if std::mem::replace(&mut seen[d.after_layer], true) {
                return Err(Error::config(format!(
                    "two dropout specs after layer {}",
                    d.after_layer
                )));
            }
        }
        let trainable = vec![true; layers.len()];
        Ok(Mlp {
            input_width,
            layers,
            dropout,
            trainable,
        })
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().map_or(0, DenseLayer::fan_out)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn dropout(&self) -> &[DropoutSpec] {
        &self.dropout
    }

    /// Widths from input to output, e.g. `[40, 80, 80, 1]`.
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input_width)
            .chain(self.layers.iter().map(DenseLayer::fan_out))
            .collect()
    }

    pub fn is_trainable(&self, layer: usize) -> bool {
        self.trainable[layer]
    }

    pub fn set_trainable(&mut self, trainable: bool) {
        self.trainable.iter_mut().for_each(|t| *t = trainable);
    }

    pub fn set_layer_trainable(&mut self, layer: usize, trainable: bool) {
        self.trainable[layer] = trainable;
    }

    /// True when the network ends in a single sigmoid node.
    pub fn is_classifier(&self) -> bool {
        self.layers
            .last()
            .is_some_and(|l| l.fan_out() == 1 && l.activation == Activation::Sigmoid)
    }

    /// Copy with the final layer removed (and any dropout that followed it).
    pub fn without_head(&self) -> Result<Mlp> {
        if self.layers.len() < 2 {
            return Err(Error::config("cannot remove the only layer of a network"));
        }
        let keep = self.layers.len() - 1;
        let mut body = Mlp::new(
            self.input_width,
            self.layers[..keep].to_vec(),
            self.dropout
                .iter()
                .copied()
                .filter(|d| d.after_layer < keep)
                .collect(),
        )?;
        body.trainable = self.trainable[..keep].to_vec();
        Ok(body)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    /// Per layer: weights (row-major) then biases.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        self.flat_params_into(&mut out);
        out
    }

    pub fn flat_params_into(&self, out: &mut Vec<f64>) {
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.biases);
        }
    }

    /// Inverse of [`Mlp::flat_params`]; returns the number of values consumed.
    pub fn load_flat_params(&mut self, params: &[f64]) -> Result<usize> {
        if params.len() < self.param_count() {
            return Err(Error::Dimension {
                context: "flat parameter vector",
                expected: self.param_count(),
                actual: params.len(),
            });
        }
        let mut offset = 0;
        for l in &mut self.layers {
            let nw = l.weights.as_slice().len();
            l.weights
                .as_mut_slice()
                .copy_from_slice(&params[offset..offset + nw]);
            offset += nw;
            let nb = l.biases.len();
            l.biases.copy_from_slice(&params[offset..offset + nb]);
            offset += nb;
        }
        Ok(offset)
    }

    fn check_input(&self, batch: &Matrix) -> Result<()> {
        if batch.cols() != self.input_width {
            return Err(Error::Dimension {
                context: "network input width",
                expected: self.input_width,
                actual: batch.cols(),
            });
        }
        Ok(())
    }

    /// Forward pass. In [`Mode::Train`] dropout masks are drawn from `rng` and
    /// recorded in the returned pass; in [`Mode::Infer`] dropout is the
    /// identity and `rng` is not touched.
    pub fn forward(
        &self,
        batch: &Matrix,
        mode: Mode,
        rng: &mut dyn RngCore,
    ) -> Result<ForwardPass> {
        self.check_input(batch)?;
        let n = self.layers.len();
        let mut pre = Vec::with_capacity(n);
        let mut post: Vec<Matrix> = Vec::with_capacity(n);
        let mut masks = Vec::with_capacity(n);
        for (i, layer) in self.layers.iter().enumerate() {
            let x = if i == 0 { batch } else { &post[i - 1] };
            let z = layer.affine(x)?;
            let mut a = layer.activate(&z);
            let mask = match (mode, self.dropout_after(i)) {
                (Mode::Train, Some(spec)) if spec.rate > 0.0 => {
                    let m = spec.draw_mask(a.rows(), a.cols(), rng);
                    for (v, k) in a.as_mut_slice().iter_mut().zip(m.as_slice()) {
                        *v *= k;
                    }
                    Some(m)
                }
                _ => None,
            };
            pre.push(z);
            post.push(a);
            masks.push(mask);
        }
        Ok(ForwardPass {
            input: batch.clone(),
            pre,
            post,
            masks,
        })
    }

    /// Inference-mode output (dropout off).
    pub fn infer(&self, batch: &Matrix) -> Result<Matrix> {
        self.check_input(batch)?;
        let mut x = self.layers[0].activate(&self.layers[0].affine(batch)?);
        for layer in &self.layers[1..] {
            x = layer.activate(&layer.affine(&x)?);
        }
        Ok(x)
    }

    fn dropout_after(&self, layer: usize) -> Option<&DropoutSpec> {
        self.dropout.iter().find(|d| d.after_layer == layer)
    }

    fn check_pass(&self, pass: &ForwardPass) -> Result<()> {
        self.check_input(&pass.input)?;
        if pass.pre.len() != self.layers.len() || pass.masks.len() != self.layers.len() {
            return Err(Error::Dimension {
                context: "recorded forward pass layer count",
                expected: self.layers.len(),
                actual: pass.pre.len(),
            });
        }
        let rows = pass.input.rows();
        for (layer, (z, mask)) in self.layers.iter().zip(pass.pre.iter().zip(&pass.masks)) {
            if z.rows() != rows || z.cols() != layer.fan_out() {
                return Err(Error::Dimension {
                    context: "recorded pre-activation shape",
                    expected: rows * layer.fan_out(),
                    actual: z.rows() * z.cols(),
                });
            }
            if let Some(m) = mask {
                if m.rows() != rows || m.cols() != layer.fan_out() {
                    return Err(Error::Dimension {
                        context: "dropout mask shape",
                        expected: rows * layer.fan_out(),
                        actual: m.rows() * m.cols(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Reverse pass from the gradient of the loss with respect to the
    /// network's final output (post-activation, post-dropout).
    ///
    /// Returns parameter gradients (zero for frozen layers) and, when
    /// `want_input_grad`, the gradient with respect to the input batch.
    pub fn backward_from_output(
        &self,
        pass: &ForwardPass,
        d_output: &Matrix,
        want_input_grad: bool,
    ) -> Result<(Gradients, Option<Matrix>)> {
        self.check_pass(pass)?;
        let last = self.layers.len() - 1;
        let mut d = d_output.clone();
        if d.rows() != pass.pre[last].rows() || d.cols() != pass.pre[last].cols() {
            return Err(Error::Dimension {
                context: "output gradient shape",
                expected: pass.pre[last].rows() * pass.pre[last].cols(),
                actual: d.rows() * d.cols(),
            });
        }
        self.through_layer_output(last, pass, &mut d);
        self.backward_from_pre(pass, d, want_input_grad)
    }

    /// Reverse pass from the gradient with respect to the final layer's
    /// pre-activation. Used with a sigmoid head and BCE, where that gradient
    /// is simply `(score - label) / n`.
    pub fn backward_from_logits(
        &self,
        pass: &ForwardPass,
        d_logits: Matrix,
        want_input_grad: bool,
    ) -> Result<(Gradients, Option<Matrix>)> {
        self.check_pass(pass)?;
        let last = self.layers.len() - 1;
        if d_logits.rows() != pass.pre[last].rows() || d_logits.cols() != pass.pre[last].cols() {
            return Err(Error::Dimension {
                context: "logit gradient shape",
                expected: pass.pre[last].rows() * pass.pre[last].cols(),
                actual: d_logits.rows() * d_logits.cols(),
            });
        }
        self.backward_from_pre(pass, d_logits, want_input_grad)
    }

    /// `d` arrives as d(loss)/d(post of layer i); leaves as d/d(pre of layer i).
    fn through_layer_output(&self, i: usize, pass: &ForwardPass, d: &mut Matrix) {
        if let Some(m) = &pass.masks[i] {
            for (g, k) in d.as_mut_slice().iter_mut().zip(m.as_slice()) {
                *g *= k;
            }
        }
        let act = self.layers[i].activation;
        for (g, z) in d.as_mut_slice().iter_mut().zip(pass.pre[i].as_slice()) {
            *g *= act.derivative(*z);
        }
    }

    fn backward_from_pre(
        &self,
        pass: &ForwardPass,
        mut d_pre: Matrix,
        want_input_grad: bool,
    ) -> Result<(Gradients, Option<Matrix>)> {
        let mut grads = Gradients::zeros_like(self);
        let mut input_grad = None;
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let x = if i == 0 {
                &pass.input
            } else {
                &pass.post[i - 1]
            };
            if self.trainable[i] {
                grads.weights[i] = x.t_matmul(&d_pre)?;
                let gb = &mut grads.biases[i];
                for r in 0..d_pre.rows() {
                    for (b, g) in gb.iter_mut().zip(d_pre.row(r)) {
                        *b += g;
                    }
                }
            }
            let need_upstream = i > 0 && self.trainable[..i].iter().any(|&t| t);
            if need_upstream || want_input_grad {
                let mut d_x = d_pre.matmul_t(&layer.weights)?;
                if i == 0 {
                    input_grad = Some(d_x);
                    break;
                }
                self.through_layer_output(i - 1, pass, &mut d_x);
                d_pre = d_x;
            } else {
                break;
            }
        }
        Ok((grads, input_grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn identity_net(n: usize) -> Mlp {
        let layer =
            DenseLayer::new(Matrix::identity(n), vec![0.0; n], Activation::Identity).unwrap();
        Mlp::new(n, vec![layer], vec![]).unwrap()
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let net = identity_net(3);
        let x = Matrix::from_rows(&[vec![1.0, -2.0, 3.5], vec![0.0, 4.0, -1.0]]).unwrap();
        let pass = net.forward(&x, Mode::Infer, &mut stream(0)).unwrap();
        assert_eq!(pass.output(), &x);
        assert_eq!(net.infer(&x).unwrap(), x);
    }

    #[test]
    fn width_mismatch_names_expected_and_actual() {
        let net = identity_net(3);
        let x = Matrix::zeros(2, 4);
        let err = net.forward(&x, Mode::Infer, &mut stream(0)).unwrap_err();
        match err {
            Error::Dimension {
                expected, actual, ..
            } => assert_eq!((expected, actual), (3, 4)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn layers_must_chain() {
        let mut rng = stream(1);
        let a = DenseLayer::glorot(2, 3, Activation::Relu, &mut rng).unwrap();
        let b = DenseLayer::glorot(4, 1, Activation::Sigmoid, &mut rng).unwrap();
        assert!(Mlp::new(2, vec![a, b], vec![]).is_err());
    }

    #[test]
    fn flat_params_round_trip() {
        let mut rng = stream(2);
        let a = DenseLayer::glorot(2, 3, Activation::Relu, &mut rng).unwrap();
        let b = DenseLayer::glorot(3, 1, Activation::Sigmoid, &mut rng).unwrap();
        let net = Mlp::new(2, vec![a, b], vec![]).unwrap();
        let flat = net.flat_params();
        assert_eq!(flat.len(), net.param_count());
        let mut other = net.clone();
        other.load_flat_params(&vec![0.0; flat.len()]).unwrap();
        other.load_flat_params(&flat).unwrap();
        assert_eq!(other, net);
    }

    #[test]
    fn mismatched_mask_is_rejected() {
        let mut rng = stream(3);
        let a = DenseLayer::glorot(2, 3, Activation::Relu, &mut rng).unwrap();
        let b = DenseLayer::glorot(3, 1, Activation::Sigmoid, &mut rng).unwrap();
        let net = Mlp::new(2, vec![a, b], vec![DropoutSpec::new(0.5, 0).unwrap()]).unwrap();
        let x = Matrix::zeros(4, 2);
        let mut pass = net.forward(&x, Mode::Train, &mut rng).unwrap();
        pass.masks[0] = Some(Matrix::zeros(3, 3));
        let d = Matrix::zeros(4, 1);
        assert!(net.backward_from_logits(&pass, d, false).is_err());
    }
}
