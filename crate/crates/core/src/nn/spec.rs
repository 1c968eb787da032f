use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Declarative description of one layer, used for weight-file headers and
/// parameter/FLOP accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Dense { inp: usize, out: usize },
    Conv1d { c_in: usize, c_out: usize, kernel: usize, stride: usize, padding: usize },
    Batchnorm1d { channels: usize },
    Maxpool1d { size: usize },
    Globalavgpool1d,
    Dropout { rate: f64 },
    Embedding { classes: usize, dim: usize },
    Sigmoid,
    Relu,
    LeakyRelu { alpha: f64 },
    Tanh,
    Softmax,
}

impl LayerSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |vals: &[usize]| vals.iter().all(|&v| v >= 1);
        let ok = match *self {
            LayerSpec::Dense { inp, out } => positive(&[inp, out]),
            LayerSpec::Conv1d { c_in, c_out, kernel, stride, .. } => positive(&[c_in, c_out, kernel, stride]),
            LayerSpec::Batchnorm1d { channels } => channels >= 1,
            LayerSpec::Maxpool1d { size } => size >= 1,
            LayerSpec::Embedding { classes, dim } => positive(&[classes, dim]),
            LayerSpec::Dropout { rate } => (0.0..1.0).contains(&rate),
            LayerSpec::LeakyRelu { alpha } => alpha > 0.0,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("invalid layer spec {self:?}")))
        }
    }

    /// Trainable parameter count (batchnorm counts gamma and beta only).
    pub fn param_count(&self) -> usize {
        match *self {
            LayerSpec::Dense { inp, out } => inp * out + out,
            LayerSpec::Conv1d { c_in, c_out, kernel, .. } => c_out * c_in * kernel + c_out,
            LayerSpec::Batchnorm1d { channels } => 2 * channels,
            LayerSpec::Embedding { classes, dim } => classes * dim,
            _ => 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_param_count() {
        assert_eq!(LayerSpec::Dense { inp: 3, out: 4 }.param_count(), 16);
    }

    #[test]
    fn validation() {
        assert!(LayerSpec::Dropout { rate: 1.0 }.validate().is_err());
        assert!(LayerSpec::Dropout { rate: 0.0 }.validate().is_ok());
        assert!(LayerSpec::LeakyRelu { alpha: 0.0 }.validate().is_err());
        assert!(LayerSpec::Dense { inp: 0, out: 3 }.validate().is_err());
        assert!(LayerSpec::Conv1d { c_in: 1, c_out: 16, kernel: 7, stride: 2, padding: 3 }.validate().is_ok());
    }

    #[test]
    fn serde_round_trip() {
        let s = LayerSpec::Conv1d { c_in: 1, c_out: 16, kernel: 7, stride: 2, padding: 3 };
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"kind\":\"conv1d\""));
        assert_eq!(serde_json::from_str::<LayerSpec>(&json).unwrap(), s);
    }
}
