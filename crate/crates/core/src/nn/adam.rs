use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 0.0002,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates of one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Tensor,
    pub v: Tensor,
    pub t: u64,
    pub config: AdamConfig,
}

impl AdamState {
    pub fn new(shape: &[usize], config: AdamConfig) -> Self {
        AdamState {
            m: Tensor::zeros(shape),
            v: Tensor::zeros(shape),
            t: 0,
            config,
        }
    }
}

/// One bias-corrected Adam update of `param` along `grad`.
pub fn adam_step(param: &mut Tensor, grad: &Tensor, state: &mut AdamState) -> Result<()> {
    if param.shape() != grad.shape() || param.shape() != state.m.shape() {
        return Err(Error::param(format!(
            "adam shapes disagree: param {:?}, grad {:?}, state {:?}",
            param.shape(),
            grad.shape(),
            state.m.shape()
        )));
    }
    let AdamConfig {
        lr,
        beta1,
        beta2,
        eps,
    } = state.config;
    state.t += 1;
    let bc1 = 1.0 - beta1.powi(state.t as i32);
    let bc2 = 1.0 - beta2.powi(state.t as i32);
    let m = state.m.data_mut();
    let v = state.v.data_mut();
    for (((p, &g), mi), vi) in param
        .data_mut()
        .iter_mut()
        .zip(grad.data())
        .zip(m.iter_mut())
        .zip(v.iter_mut())
    {
        *mi = beta1 * *mi + (1.0 - beta1) * g;
        *vi = beta2 * *vi + (1.0 - beta2) * g * g;
        let m_hat = *mi / bc1;
        let v_hat = *vi / bc2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

/// A trainable tensor together with its gradient accumulator and optimiser state.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub value: Tensor,
    pub grad: Tensor,
    pub adam: AdamState,
}

impl Param {
    pub fn new(value: Tensor) -> Self {
        let shape = value.shape().to_vec();
        Param {
            grad: Tensor::zeros(&shape),
            adam: AdamState::new(&shape, AdamConfig::default()),
            value,
        }
    }

    pub fn with_config(mut self, config: AdamConfig) -> Self {
        self.adam.config = config;
        self
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }

    /// Applies one Adam step with the accumulated gradient and clears it.
    pub fn step(&mut self) {
        adam_step(&mut self.value, &self.grad, &mut self.adam).expect("param shapes are fixed");
        self.zero_grad();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        for g in [0.5, -3.0, 1e-3, 42.0] {
            let mut p = Tensor::vector(vec![1.0; 4]);
            let grad = Tensor::vector(vec![g; 4]);
            let mut st = AdamState::new(&[4], AdamConfig::default());
            adam_step(&mut p, &grad, &mut st).unwrap();
            // m̂ = g, v̂ = g², so the step is lr·g/(|g| + eps)
            let want = 0.0002 * g.abs() / (g.abs() + 1e-8);
            for v in p.data() {
                let moved = (1.0 - v).abs();
                assert!((moved - want).abs() / want < 1e-6);
                assert!((moved - 0.0002).abs() / 0.0002 < 1e-4);
            }
        }
    }

    #[test]
    fn zero_gradient_leaves_param_and_counts_step() {
        let mut p = Tensor::vector(vec![0.3, -0.7]);
        let before = p.clone();
        let mut st = AdamState::new(&[2], AdamConfig::default());
        adam_step(&mut p, &Tensor::zeros(&[2]), &mut st).unwrap();
        assert_eq!(p, before);
        assert_eq!(st.t, 1);
    }

    #[test]
    fn deterministic_updates() {
        let grad = Tensor::vector(vec![0.1, -0.2, 0.3]);
        let run = || {
            let mut p = Tensor::vector(vec![1.0, 2.0, 3.0]);
            let mut st = AdamState::new(&[3], AdamConfig::default());
            for _ in 0..5 {
                adam_step(&mut p, &grad, &mut st).unwrap();
            }
            (p, st)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut p = Tensor::vector(vec![0.0; 3]);
        let mut st = AdamState::new(&[3], AdamConfig::default());
        assert!(adam_step(&mut p, &Tensor::zeros(&[2]), &mut st).is_err());
    }
}
