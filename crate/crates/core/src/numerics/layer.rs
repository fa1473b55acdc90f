use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Sigmoid,
    Identity,
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        0.0
    }
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => relu(z),
            Activation::Sigmoid => sigmoid(z),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the pre-activation value.
    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => {
                let s = sigmoid(z);
                s * (1.0 - s)
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Glorot/Xavier uniform weights in `±sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_init(fan_in: usize, fan_out: usize, rng: &mut dyn RngCore) -> Result<Matrix> {
    if fan_in == 0 || fan_out == 0 {
        return Err(Error::config("layer fan-in and fan-out must be >= 1"));
    }
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..fan_in * fan_out)
        .map(|_| rng.random_range(-limit..=limit))
        .collect();
    Matrix::from_vec(fan_in, fan_out, data)
}

/// Affine map followed by an element-wise activation.
///
/// Weights are stored `fan_in × fan_out` so that a batch `X` (rows = samples)
/// maps to `X · W + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Matrix, biases: Vec<f64>, activation: Activation) -> Result<Self> {
        if biases.len() != weights.cols() {
            return Err(Error::Dimension {
                context: "layer bias length",
                expected: weights.cols(),
                actual: biases.len(),
            });
        }
        if weights.rows() == 0 || weights.cols() == 0 {
            return Err(Error::config("layer dimensions must be >= 1"));
        }
        Ok(DenseLayer {
            weights,
            biases,
            activation,
        })
    }

    pub fn glorot(
        fan_in: usize,
        fan_out: usize,
        activation: Activation,
        rng: &mut dyn RngCore,
    ) -> Result<Self> {
        let weights = glorot_init(fan_in, fan_out, rng)?;
        DenseLayer::new(weights, vec![0.0; fan_out], activation)
    }

    #[inline]
    pub fn fan_in(&self) -> usize {
        self.weights.rows()
    }

    #[inline]
    pub fn fan_out(&self) -> usize {
        self.weights.cols()
    }

    pub fn param_count(&self) -> usize {
        self.fan_in() * self.fan_out() + self.fan_out()
    }

    /// Pre-activation `X · W + b`.
    pub fn affine(&self, x: &Matrix) -> Result<Matrix> {
        let mut z = x.matmul(&self.weights)?;
        for r in 0..z.rows() {
            for (v, b) in z.row_mut(r).iter_mut().zip(&self.biases) {
                *v += b;
            }
        }
        Ok(z)
    }

    pub fn activate(&self, z: &Matrix) -> Matrix {
        let mut out = z.clone();
        for v in out.as_mut_slice() {
            *v = self.activation.apply(*v);
        }
        out
    }
}

/// Dropout following the layer at index `after_layer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropoutSpec {
    pub rate: f64,
    pub after_layer: usize,
}

impl DropoutSpec {
    pub fn new(rate: f64, after_layer: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::config(format!(
                "dropout rate must lie in [0, 1), got {rate}"
            )));
        }
        Ok(DropoutSpec { rate, after_layer })
    }

    /// Inverted-dropout mask: kept units are scaled by `1 / (1 - rate)`.
    pub fn draw_mask(&self, rows: usize, cols: usize, rng: &mut dyn RngCore) -> Matrix {
        let keep = 1.0 - self.rate;
        let scale = 1.0 / keep;
        let mut mask = Matrix::zeros(rows, cols);
        for v in mask.as_mut_slice() {
            if rng.random::<f64>() < keep {
                *v = scale;
            }
        }
        mask
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn activation_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(relu(-3.0), 0.0);
        assert_eq!(relu(2.5), 2.5);
        assert!(sigmoid(800.0) <= 1.0 && sigmoid(-800.0) >= 0.0);
        assert!((sigmoid(2.0) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn glorot_bounds_and_determinism() {
        let w = glorot_init(3, 3, &mut stream(1)).unwrap();
        assert!(w.as_slice().iter().all(|v| v.abs() <= 1.0));
        assert_eq!(w, glorot_init(3, 3, &mut stream(1)).unwrap());
        assert!(glorot_init(0, 3, &mut stream(1)).is_err());
    }

    #[test]
    fn glorot_mean_is_centered() {
        // 10^5 draws: fan_in * fan_out = 100_000
        let w = glorot_init(250, 400, &mut stream(11)).unwrap();
        let mean = w.as_slice().iter().sum::<f64>() / w.as_slice().len() as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn dropout_rate_must_be_below_one() {
        assert!(DropoutSpec::new(1.0, 0).is_err());
        assert!(DropoutSpec::new(-0.1, 0).is_err());
        assert!(DropoutSpec::new(0.5, 0).is_ok());
    }
}
