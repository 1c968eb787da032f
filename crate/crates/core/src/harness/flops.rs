use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::conv::conv_out_len;
use crate::nn::LayerSpec;

/// Published totals for the reference model, reported for context.
pub const REFERENCE_FLOPS: f64 = 0.24e9;
pub const REFERENCE_PARAMS: f64 = 4.97e6;

/// Counts for one layer. `m` is the output feature-map length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerFlops {
    pub layer: String,
    pub m: u64,
    /// Multiply-accumulates with the map length counted once: `M·K·C_in·C_out`
    /// for convolutions, `in·out` for dense layers.
    pub flops: u64,
    /// The two-dimensional formula applied literally: `M²·K²·C_in·C_out`.
    pub flops_literal: u64,
    /// Weights and biases actually stored.
    pub params_strict: u64,
    /// Kernel terms plus feature-map terms, `K·C_in·C_out + M·C_out`.
    pub params_formula: u64,
    /// The same with squared map and kernel sizes.
    pub params_formula_literal: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub flops: u64,
    pub flops_literal: u64,
    pub params_strict: u64,
    pub params_formula: u64,
    pub params_formula_literal: u64,
}

impl Totals {
    fn add(&mut self, l: &LayerFlops) {
        self.flops += l.flops;
        self.flops_literal += l.flops_literal;
        self.params_strict += l.params_strict;
        self.params_formula += l.params_formula;
        self.params_formula_literal += l.params_formula_literal;
    }

    pub fn of(layers: &[LayerFlops]) -> Totals {
        let mut t = Totals::default();
        layers.iter().for_each(|l| t.add(l));
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlopsReport {
    pub network: String,
    pub layers: Vec<LayerFlops>,
    pub totals: Totals,
}

/// Walks `layers` from an input of `channels × length` (length 1 for vector
/// inputs) and counts FLOPs and parameters per layer. Layers without
/// multiply-accumulates count zero FLOPs.
pub fn count_flops(network: &str, layers: &[LayerSpec], channels: usize, length: usize) -> Result<FlopsReport> {
    let (mut c, mut m) = (channels as u64, length as u64);
    let mut rows = Vec::new();
    for spec in layers {
        spec.validate()?;
        let mut row = LayerFlops {
            layer: serde_json::to_value(spec)?["kind"].as_str().unwrap_or("?").to_string(),
            m,
            flops: 0,
            flops_literal: 0,
            params_strict: spec.param_count() as u64,
            params_formula: 0,
            params_formula_literal: 0,
        };
        match *spec {
            LayerSpec::Conv1d { c_in, c_out, kernel, stride, padding } => {
                if c_in as u64 != c {
                    return Err(Error::param(format!("conv1d expects {c_in} channels, input has {c}")));
                }
                let m_out = conv_out_len(m as usize, kernel, stride, padding)
                    .ok_or_else(|| Error::param("conv1d kernel longer than its padded input"))? as u64;
                let (k, ci, co) = (kernel as u64, c_in as u64, c_out as u64);
                row.m = m_out;
                row.flops = m_out * k * ci * co;
                row.flops_literal = m_out * m_out * k * k * ci * co;
                row.params_formula = k * ci * co + m_out * co;
                row.params_formula_literal = k * k * ci * co + m_out * m_out * co;
                c = co;
                m = m_out;
            }
            LayerSpec::Dense { inp, out } => {
                if (inp as u64) != c * m {
                    return Err(Error::param(format!("dense expects {inp} inputs, got {}", c * m)));
                }
                let (i, o) = (inp as u64, out as u64);
                row.m = 1;
                row.flops = i * o;
                row.flops_literal = i * o;
                row.params_formula = i * o + o;
                row.params_formula_literal = i * o + o;
                c = o;
                m = 1;
            }
            LayerSpec::Embedding { classes, dim } => {
                // the label vector is appended to the running feature width
                row.params_formula = (classes * dim) as u64;
                row.params_formula_literal = row.params_formula;
                c = c * m + dim as u64;
                m = 1;
            }
            LayerSpec::Maxpool1d { size } => {
                m = m.div_ceil(size as u64);
                row.m = m;
            }
            LayerSpec::Globalavgpool1d => {
                m = 1;
                row.m = 1;
            }
            LayerSpec::Batchnorm1d { channels } => {
                if channels as u64 != c {
                    return Err(Error::param(format!("batchnorm expects {channels} channels, input has {c}")));
                }
                row.params_formula = 2 * c;
                row.params_formula_literal = 2 * c;
            }
            _ => {}
        }
        rows.push(row);
    }
    Ok(FlopsReport { network: network.into(), totals: Totals::of(&rows), layers: rows })
}
