use std::str::FromStr;

use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const DEFAULT_LEAKY_SLOPE: f64 = 0.2;

/// Elementwise nonlinearities.
///
/// ReLU and LeakyReLU take the negative-side slope at exactly zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Sigmoid,
    Relu,
    LeakyRelu(f64),
    Tanh,
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigmoid" => Ok(Activation::Sigmoid),
            "relu" => Ok(Activation::Relu),
            "leaky_relu" => Ok(Activation::LeakyRelu(DEFAULT_LEAKY_SLOPE)),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::param(format!("unknown activation `{other}`"))),
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => sigmoid(x),
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu(a) => {
                if x > 0.0 {
                    x
                } else {
                    a * x
                }
            }
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative given the input `x` and the output `y = apply(x)`.
    #[inline]
    pub fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu(a) => {
                if x > 0.0 {
                    1.0
                } else {
                    a
                }
            }
            Activation::Tanh => 1.0 - y * y,
        }
    }

    pub fn forward(self, input: &Tensor) -> Tensor {
        input.map(|v| self.apply(v))
    }

    pub fn backward(self, input: &Tensor, output: &Tensor, grad_out: &Tensor) -> Tensor {
        let data = input
            .data()
            .iter()
            .zip(output.data())
            .zip(grad_out.data())
            .map(|((&x, &y), &g)| g * self.derivative(x, y))
            .collect();
        Tensor::new(input.shape().to_vec(), data).expect("shape preserved")
    }

    pub fn forward_in_place(self, t: &mut Tensor) {
        t.data_mut().iter_mut().for_each(|v| *v = self.apply(*v));
    }
}

/// Row-wise softmax of a `[rows, classes]` matrix.
pub fn softmax(logits: &Tensor) -> Tensor {
    let mut out = logits.clone();
    for r in 0..logits.dim(0) {
        let row = out.row_mut(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        row.iter_mut().for_each(|v| *v /= sum);
    }
    out
}
