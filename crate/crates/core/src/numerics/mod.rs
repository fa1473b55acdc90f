//! Dense-network math: matrices, layers, loss, backpropagation and Adam.

mod adam;
mod gradcheck;
mod layer;
mod loss;
mod matrix;
mod network;
mod train;

pub use adam::{AdamConfig, AdamState};
pub use gradcheck::finite_diff_grad;
pub use layer::{glorot_init, relu, sigmoid, Activation, DenseLayer, DropoutSpec};
pub use loss::{bce_loss, SCORE_CLAMP};
pub use matrix::Matrix;
pub use network::{ForwardPass, Gradients, Mlp, Mode};
pub use train::{backprop, fit, logit_gradient, FitConfig, FitHistory};
