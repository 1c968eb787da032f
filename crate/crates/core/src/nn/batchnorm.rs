use super::adam::Param;
use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Values saved by a training-mode forward pass.
#[derive(Debug, Clone)]
pub struct BatchNormCache {
    xhat: Tensor,
    inv_std: Vec<f64>,
}

/// Per-channel normalisation over the batch and length axes of `[batch, C, M]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm1d {
    pub gamma: Param,
    pub beta: Param,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub momentum: f64,
    pub eps: f64,
}

fn dims(x: &Tensor, channels: usize) -> Result<(usize, usize)> {
    let (batch, c, m) = match x.shape() {
        [b, c] => (*b, *c, 1),
        [b, c, m] => (*b, *c, *m),
        other => return Err(Error::param(format!("batchnorm expects rank 2 or 3, got {other:?}"))),
    };
    if c != channels {
        return Err(Error::param(format!("batchnorm has {channels} channels, input has {c}")));
    }
    Ok((batch, m))
}

impl BatchNorm1d {
    pub fn new(channels: usize) -> Self {
        BatchNorm1d {
            gamma: Param::new(Tensor::full(&[channels], 1.0)),
            beta: Param::new(Tensor::zeros(&[channels])),
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            momentum: 0.1,
            eps: 1e-5,
        }
    }

    pub fn channels(&self) -> usize {
        self.running_mean.len()
    }

    /// Eval-mode normalisation with the running statistics.
    pub fn infer(&self, x: &Tensor) -> Result<Tensor> {
        let c = self.channels();
        let (batch, m) = dims(x, c)?;
        let gamma = self.gamma.value.data();
        let beta = self.beta.value.data();
        let mut y = x.clone();
        for ch in 0..c {
            let inv = 1.0 / (self.running_var[ch] + self.eps).sqrt();
            for b in 0..batch {
                let row = &mut y.data_mut()[(b * c + ch) * m..(b * c + ch + 1) * m];
                for v in row.iter_mut() {
                    *v = gamma[ch] * (*v - self.running_mean[ch]) * inv + beta[ch];
                }
            }
        }
        Ok(y)
    }

    /// Normalises `x`; in training mode the batch statistics are used and
    /// folded into the running estimates.
    pub fn forward(&mut self, x: &Tensor, mode: Mode) -> Result<(Tensor, Option<BatchNormCache>)> {
        let c = self.channels();
        let (batch, m) = dims(x, c)?;
        let gamma = self.gamma.value.data();
        let beta = self.beta.value.data();
        let mut y = x.clone();
        match mode {
            Mode::Eval => Ok((self.infer(x)?, None)),
            Mode::Train => {
                if batch < 2 {
                    return Err(Error::param("batchnorm needs at least 2 samples in training mode"));
                }
                let count = (batch * m) as f64;
                let mut xhat = x.clone();
                let mut inv_std = vec![0.0; c];
                for ch in 0..c {
                    let mut mean = 0.0;
                    for b in 0..batch {
                        mean += x.data()[(b * c + ch) * m..(b * c + ch + 1) * m].iter().sum::<f64>();
                    }
                    mean /= count;
                    let mut var = 0.0;
                    for b in 0..batch {
                        var += x.data()[(b * c + ch) * m..(b * c + ch + 1) * m]
                            .iter()
                            .map(|v| (v - mean).powi(2))
                            .sum::<f64>();
                    }
                    var /= count;
                    let inv = 1.0 / (var + self.eps).sqrt();
                    inv_std[ch] = inv;
                    for b in 0..batch {
                        let range = (b * c + ch) * m..(b * c + ch + 1) * m;
                        for (h, o) in xhat.data_mut()[range.clone()]
                            .iter_mut()
                            .zip(y.data_mut()[range].iter_mut())
                        {
                            *h = (*h - mean) * inv;
                            *o = gamma[ch] * *h + beta[ch];
                        }
                    }
                    let unbiased = var * count / (count - 1.0);
                    self.running_mean[ch] = (1.0 - self.momentum) * self.running_mean[ch] + self.momentum * mean;
                    self.running_var[ch] = (1.0 - self.momentum) * self.running_var[ch] + self.momentum * unbiased;
                }
                Ok((y, Some(BatchNormCache { xhat, inv_std })))
            }
        }
    }

    /// Accumulates `dgamma`, `dbeta` and returns the input gradient of a training-mode pass.
    pub fn backward(&mut self, cache: &BatchNormCache, grad_out: &Tensor) -> Result<Tensor> {
        let c = self.channels();
        let (batch, m) = dims(grad_out, c)?;
        if cache.xhat.shape() != grad_out.shape() {
            return Err(Error::param("batchnorm cache does not match upstream gradient"));
        }
        let count = (batch * m) as f64;
        let mut dx = Tensor::zeros(grad_out.shape());
        for ch in 0..c {
            let mut sum_g = 0.0;
            let mut sum_gx = 0.0;
            for b in 0..batch {
                let range = (b * c + ch) * m..(b * c + ch + 1) * m;
                for (g, h) in grad_out.data()[range.clone()].iter().zip(&cache.xhat.data()[range]) {
                    sum_g += g;
                    sum_gx += g * h;
                }
            }
            self.gamma.grad.data_mut()[ch] += sum_gx;
            self.beta.grad.data_mut()[ch] += sum_g;
            let scale = self.gamma.value.data()[ch] * cache.inv_std[ch] / count;
            for b in 0..batch {
                let range = (b * c + ch) * m..(b * c + ch + 1) * m;
                for ((d, g), h) in dx.data_mut()[range.clone()]
                    .iter_mut()
                    .zip(&grad_out.data()[range.clone()])
                    .zip(&cache.xhat.data()[range])
                {
                    *d = scale * (count * g - sum_g - h * sum_gx);
                }
            }
        }
        Ok(dx)
    }
}
