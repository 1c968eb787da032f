use serde_json::json;

use crate::error::{Error, Result};
use crate::nn::pool::{global_avg_pool1d_backward, global_avg_pool1d_forward, maxpool1d_backward, maxpool1d_forward};
use crate::nn::{Activation, BatchNorm1d, BatchNormCache, Conv1d, Dense, LayerSpec, Mode, Param, Tensor, WeightFile};
use crate::rng::Stream;
use crate::synth::NUM_CLASSES;

pub const INPUT_LEN: usize = 800;

/// `(c_in, c_out, kernel, stride, padding)` of the three conv stages.
pub const CONV_STAGES: [(usize, usize, usize, usize, usize); 3] = [(1, 16, 7, 2, 3), (16, 32, 5, 1, 2), (32, 64, 3, 1, 1)];
pub const HIDDEN: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvStage {
    pub conv: Conv1d,
    pub bn: BatchNorm1d,
    /// Max-pool after the activation; the last stage uses global average pooling.
    pub maxpool: bool,
}

struct StageCache {
    input: Tensor,
    bn: Option<BatchNormCache>,
    pre: Tensor,
    post: Tensor,
    argmax: Vec<usize>,
}

/// Saved activations of a forward pass.
pub struct CnnCache {
    stages: Vec<StageCache>,
    gap_shape: Vec<usize>,
    feat: Tensor,
    hidden_pre: Tensor,
    hidden: Tensor,
}

/// Three conv/batchnorm/ReLU stages, global average pooling, then a
/// `64 → 128 → 8` dense head producing logits.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnNet {
    pub stages: Vec<ConvStage>,
    pub fc1: Dense,
    pub fc2: Dense,
}

fn he(fan_in: usize) -> f64 {
    (2.0 / fan_in as f64).sqrt()
}

impl CnnNet {
    pub fn new(seed: u64) -> Self {
        let mut rng = Stream::new(seed);
        let stages = CONV_STAGES
            .iter()
            .enumerate()
            .map(|(i, &(ci, co, k, s, p))| ConvStage {
                conv: Conv1d::new(ci, co, k, s, p, &mut rng),
                bn: BatchNorm1d::new(co),
                maxpool: i + 1 < CONV_STAGES.len(),
            })
            .collect();
        let last = CONV_STAGES[CONV_STAGES.len() - 1].1;
        CnnNet {
            stages,
            fc1: Dense::new(last, HIDDEN, he(last), &mut rng),
            fc2: Dense::new(HIDDEN, NUM_CLASSES, he(HIDDEN), &mut rng),
        }
    }

    /// Accepts `[batch, 800]` or `[batch, 1, 800]`.
    fn input(x: &Tensor) -> Result<Tensor> {
        match x.shape() {
            [b, INPUT_LEN] => x.clone().reshape(&[*b, 1, INPUT_LEN]),
            [_, 1, INPUT_LEN] => Ok(x.clone()),
            other => Err(Error::param(format!("cnn expects [batch, 1, {INPUT_LEN}] input, got {other:?}"))),
        }
    }

    /// Logits `[batch, 8]`. Training mode uses batch statistics and updates
    /// the running ones.
    pub fn forward(&mut self, x: &Tensor, mode: Mode) -> Result<(Tensor, CnnCache)> {
        let mut h = Self::input(x)?;
        let mut caches = Vec::with_capacity(self.stages.len());
        for stage in &mut self.stages {
            let conv = stage.conv.forward(&h)?;
            let (pre, bn) = stage.bn.forward(&conv, mode)?;
            let post = Activation::Relu.forward(&pre);
            let (next, argmax) = if stage.maxpool { maxpool1d_forward(&post)? } else { (post.clone(), Vec::new()) };
            caches.push(StageCache { input: std::mem::replace(&mut h, next), bn, pre, post, argmax });
        }
        let gap_shape = h.shape().to_vec();
        let feat = global_avg_pool1d_forward(&h)?;
        let hidden_pre = self.fc1.forward(&feat)?;
        let hidden = Activation::Relu.forward(&hidden_pre);
        let logits = self.fc2.forward(&hidden)?;
        Ok((logits, CnnCache { stages: caches, gap_shape, feat, hidden_pre, hidden }))
    }

    /// Eval-mode logits without touching running statistics.
    pub fn infer(&self, x: &Tensor) -> Result<Tensor> {
        let mut h = Self::input(x)?;
        for stage in &self.stages {
            h = stage.bn.infer(&stage.conv.forward(&h)?)?;
            Activation::Relu.forward_in_place(&mut h);
            if stage.maxpool {
                h = maxpool1d_forward(&h)?.0;
            }
        }
        let mut hidden = self.fc1.forward(&global_avg_pool1d_forward(&h)?)?;
        Activation::Relu.forward_in_place(&mut hidden);
        self.fc2.forward(&hidden)
    }

    /// Accumulates parameter gradients of a training-mode pass and returns
    /// the input gradient `[batch, 1, 800]`.
    pub fn backward(&mut self, cache: &CnnCache, grad_logits: &Tensor) -> Result<Tensor> {
        let g = self.fc2.backward(&cache.hidden, grad_logits, true, true)?.expect("requested");
        let g = Activation::Relu.backward(&cache.hidden_pre, &cache.hidden, &g);
        let g = self.fc1.backward(&cache.feat, &g, true, true)?.expect("requested");
        let mut g = global_avg_pool1d_backward(&cache.gap_shape, &g)?;
        for (stage, sc) in self.stages.iter_mut().zip(&cache.stages).rev() {
            if stage.maxpool {
                g = maxpool1d_backward(sc.post.shape(), &sc.argmax, &g)?;
            }
            g = Activation::Relu.backward(&sc.pre, &sc.post, &g);
            let bn_cache = sc.bn.as_ref().ok_or_else(|| Error::param("backward needs a training-mode forward pass"))?;
            g = stage.bn.backward(bn_cache, &g)?;
            g = stage.conv.backward(&sc.input, &g, true)?.expect("requested");
        }
        Ok(g)
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut out = Vec::new();
        for s in &mut self.stages {
            out.extend([&mut s.conv.kernels, &mut s.conv.bias, &mut s.bn.gamma, &mut s.bn.beta]);
        }
        out.extend(self.fc1.params_mut());
        out.extend(self.fc2.params_mut());
        out
    }

    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        let mut specs = Vec::new();
        for s in &self.stages {
            let k = s.conv.kernels.value.shape();
            specs.push(LayerSpec::Conv1d {
                c_in: k[1],
                c_out: k[0],
                kernel: k[2],
                stride: s.conv.stride,
                padding: s.conv.padding,
            });
            specs.push(LayerSpec::Batchnorm1d { channels: s.bn.channels() });
            specs.push(LayerSpec::Relu);
            specs.push(if s.maxpool { LayerSpec::Maxpool1d { size: 2 } } else { LayerSpec::Globalavgpool1d });
        }
        specs.push(LayerSpec::Dense { inp: self.fc1.in_features(), out: self.fc1.out_features() });
        specs.push(LayerSpec::Relu);
        specs.push(LayerSpec::Dense { inp: self.fc2.in_features(), out: self.fc2.out_features() });
        specs
    }

    pub fn to_weights(&self) -> WeightFile {
        let mut tensors = Vec::new();
        for (i, s) in self.stages.iter().enumerate() {
            let c = s.bn.channels();
            tensors.push((format!("conv{i}.kernels"), s.conv.kernels.value.clone()));
            tensors.push((format!("conv{i}.bias"), s.conv.bias.value.clone()));
            tensors.push((format!("bn{i}.gamma"), s.bn.gamma.value.clone()));
            tensors.push((format!("bn{i}.beta"), s.bn.beta.value.clone()));
            tensors.push((format!("bn{i}.running_mean"), Tensor::new(vec![c], s.bn.running_mean.clone()).unwrap()));
            tensors.push((format!("bn{i}.running_var"), Tensor::new(vec![c], s.bn.running_var.clone()).unwrap()));
        }
        for (name, d) in [("fc1", &self.fc1), ("fc2", &self.fc2)] {
            tensors.push((format!("{name}.weight"), d.weight.value.clone()));
            tensors.push((format!("{name}.bias"), d.bias.value.clone()));
        }
        WeightFile { meta: json!({"net": "cnn"}), layers: self.layer_specs(), tensors }
    }

    pub fn from_weights(wf: &WeightFile) -> Result<Self> {
        if wf.meta["net"] != "cnn" {
            return Err(Error::Format { kind: "weight file", msg: "not a cnn checkpoint".into() });
        }
        let mut net = CnnNet::new(0);
        for (i, s) in net.stages.iter_mut().enumerate() {
            let c = s.bn.channels();
            s.conv.kernels = Param::new(wf.take(&format!("conv{i}.kernels"), s.conv.kernels.value.shape())?);
            s.conv.bias = Param::new(wf.take(&format!("conv{i}.bias"), &[c])?);
            s.bn.gamma = Param::new(wf.take(&format!("bn{i}.gamma"), &[c])?);
            s.bn.beta = Param::new(wf.take(&format!("bn{i}.beta"), &[c])?);
            s.bn.running_mean = wf.take(&format!("bn{i}.running_mean"), &[c])?.into_data();
            s.bn.running_var = wf.take(&format!("bn{i}.running_var"), &[c])?.into_data();
        }
        for (name, d) in [("fc1", &mut net.fc1), ("fc2", &mut net.fc2)] {
            let shape = d.weight.value.shape().to_vec();
            d.weight = Param::new(wf.take(&format!("{name}.weight"), &shape)?);
            d.bias = Param::new(wf.take(&format!("{name}.bias"), &[shape[0]])?);
        }
        Ok(net)
    }
}
