use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::nn::pool::{dropout_backward, dropout_forward};
use crate::nn::activation::sigmoid;
use crate::nn::{Activation, Dense, Embedding, LayerSpec, Mode, Param, Tensor, WeightFile};
use crate::rng::Stream;
use crate::synth::NUM_CLASSES;

pub const NOISE_LEN: usize = 100;
pub const EMBED_DIM: usize = 100;
pub const SPECTRUM_WIDTH: usize = 800;

/// Dense weight initialisation (biases start at zero either way).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// `N(0, 2/((1+α²)·fan_in))`, variance-preserving through LeakyReLU.
    He,
    /// `N(0, std²)` for every layer.
    Fixed(f64),
}

impl Init {
    pub fn std(self, fan_in: usize, slope: f64) -> f64 {
        match self {
            Init::He => (2.0 / ((1.0 + slope * slope) * fan_in as f64)).sqrt(),
            Init::Fixed(std) => std,
        }
    }
}
pub const DEFAULT_DROPOUT: f64 = 0.3;

/// Dense widths of the five two-layer generator blocks, input first.
pub const GENERATOR_WIDTHS: [usize; 11] = [200, 256, 256, 512, 512, 512, 512, 768, 768, 800, 800];
pub const DISCRIMINATOR_WIDTHS: [usize; 11] = [900, 800, 512, 512, 256, 256, 128, 128, 64, 64, 1];

/// Activations and dropout masks recorded by a forward pass.
#[derive(Debug, Clone)]
pub struct NetCache {
    labels: Vec<usize>,
    inputs: Vec<Tensor>,
    pre: Vec<Tensor>,
    post: Vec<Tensor>,
    masks: Vec<Option<Vec<f64>>>,
}

/// Label-conditioned MLP: `[data | embedding(label)]` through a dense stack
/// with LeakyReLU between layers and `head` on the last one. Dropout, when
/// enabled, follows the first layer of each two-layer block.
#[derive(Debug, Clone, PartialEq)]
pub struct CondMlp {
    pub embedding: Embedding,
    pub layers: Vec<Dense>,
    pub slope: f64,
    pub dropout: f64,
    head: Option<Activation>,
}

impl CondMlp {
    fn new(widths: &[usize], head: Option<Activation>, slope: f64, dropout: f64, init: Init, rng: &mut Stream) -> Self {
        let embedding = Embedding::new(NUM_CLASSES, EMBED_DIM, rng);
        let layers = widths
            .windows(2)
            .map(|w| Dense::new(w[0], w[1], init.std(w[0], slope), rng))
            .collect();
        CondMlp { embedding, layers, slope, dropout, head }
    }

    pub fn data_width(&self) -> usize {
        self.layers[0].in_features() - self.embedding.dim()
    }

    pub fn out_width(&self) -> usize {
        self.layers.last().map(Dense::out_features).unwrap_or(0)
    }

    fn activation(&self, i: usize) -> Option<Activation> {
        if i + 1 == self.layers.len() {
            self.head
        } else {
            Some(Activation::LeakyRelu(self.slope))
        }
    }

    fn has_dropout(&self, i: usize) -> bool {
        self.dropout > 0.0 && i.is_multiple_of(2) && i + 1 < self.layers.len()
    }

    fn input(&self, data: &Tensor, labels: &[usize]) -> Result<Tensor> {
        if data.rank() != 2 || data.dim(1) != self.data_width() || data.dim(0) != labels.len() {
            return Err(Error::param(format!(
                "expected [{}, {}] input, got {:?}",
                labels.len(),
                self.data_width(),
                data.shape()
            )));
        }
        Tensor::concat_cols(data, &self.embedding.lookup(labels)?)
    }

    /// Forward pass keeping everything needed by [`CondMlp::backward`].
    /// Dropout seeds are drawn from `rng` in train mode.
    pub fn forward(&self, data: &Tensor, labels: &[usize], mode: Mode, rng: &mut Stream) -> Result<(Tensor, NetCache)> {
        let mut x = self.input(data, labels)?;
        let n = self.layers.len();
        let mut cache = NetCache {
            labels: labels.to_vec(),
            inputs: Vec::with_capacity(n),
            pre: Vec::with_capacity(n),
            post: Vec::with_capacity(n),
            masks: Vec::with_capacity(n),
        };
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.forward(&x)?;
            let a = match self.activation(i) {
                Some(act) => act.forward(&z),
                None => z.clone(),
            };
            let (next, mask) = if self.has_dropout(i) {
                let seed = if mode == Mode::Train { rng.next_u64() } else { 0 };
                dropout_forward(&a, self.dropout, mode, seed)?
            } else {
                (a.clone(), None)
            };
            cache.inputs.push(std::mem::replace(&mut x, next));
            cache.pre.push(z);
            cache.post.push(a);
            cache.masks.push(mask);
        }
        Ok((x, cache))
    }

    /// Eval-mode forward without a cache.
    pub fn infer(&self, data: &Tensor, labels: &[usize]) -> Result<Tensor> {
        let mut x = self.input(data, labels)?;
        for (i, layer) in self.layers.iter().enumerate() {
            x = layer.forward(&x)?;
            if let Some(act) = self.activation(i) {
                act.forward_in_place(&mut x);
            }
        }
        Ok(x)
    }

    /// Backpropagates `grad_out` and returns the gradient for the data
    /// columns. Parameter gradients (embedding included) accumulate only
    /// when `train_params` is set.
    pub fn backward(&mut self, cache: &NetCache, grad_out: &Tensor, train_params: bool) -> Result<Tensor> {
        let mut g = grad_out.clone();
        for i in (0..self.layers.len()).rev() {
            g = dropout_backward(cache.masks[i].as_deref(), &g);
            if let Some(act) = self.activation(i) {
                g = act.backward(&cache.pre[i], &cache.post[i], &g);
            }
            g = self.layers[i]
                .backward(&cache.inputs[i], &g, train_params, true)?
                .expect("input gradient requested");
        }
        let (data_grad, emb_grad) = g.split_cols(self.data_width());
        if train_params {
            self.embedding.backward(&cache.labels, &emb_grad)?;
        }
        Ok(data_grad)
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut out = vec![&mut self.embedding.table];
        for layer in &mut self.layers {
            out.extend(layer.params_mut());
        }
        out
    }

    pub fn step(&mut self) {
        self.params_mut().into_iter().for_each(Param::step);
    }

    pub fn zero_grad(&mut self) {
        self.params_mut().into_iter().for_each(Param::zero_grad);
    }

    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        let mut specs = vec![LayerSpec::Embedding { classes: self.embedding.classes(), dim: self.embedding.dim() }];
        for (i, layer) in self.layers.iter().enumerate() {
            specs.push(LayerSpec::Dense { inp: layer.in_features(), out: layer.out_features() });
            specs.push(match self.activation(i) {
                Some(Activation::LeakyRelu(alpha)) => LayerSpec::LeakyRelu { alpha },
                Some(Activation::Tanh) => LayerSpec::Tanh,
                Some(Activation::Relu) => LayerSpec::Relu,
                // the discriminator's sigmoid is applied outside the stack
                Some(Activation::Sigmoid) | None => LayerSpec::Sigmoid,
            });
            if self.has_dropout(i) {
                specs.push(LayerSpec::Dropout { rate: self.dropout });
            }
        }
        specs
    }

    pub fn param_count(&self) -> usize {
        self.layer_specs().iter().map(LayerSpec::param_count).sum()
    }

    fn to_weights(&self, net: &str) -> WeightFile {
        let mut tensors = vec![("embedding".to_string(), self.embedding.table.value.clone())];
        for (i, layer) in self.layers.iter().enumerate() {
            tensors.push((format!("dense{i}.weight"), layer.weight.value.clone()));
            tensors.push((format!("dense{i}.bias"), layer.bias.value.clone()));
        }
        WeightFile {
            meta: json!({"net": net, "slope": self.slope, "dropout": self.dropout}),
            layers: self.layer_specs(),
            tensors,
        }
    }

    fn from_weights(wf: &WeightFile, net: &str, widths: &[usize], head: Option<Activation>) -> Result<Self> {
        if wf.meta["net"] != net {
            return Err(Error::Format { kind: "weight file", msg: format!("not a {net} checkpoint") });
        }
        let slope = wf.meta["slope"].as_f64().unwrap_or(crate::nn::DEFAULT_LEAKY_SLOPE);
        let dropout = wf.meta["dropout"].as_f64().unwrap_or(0.0);
        let mut m = CondMlp::new(widths, head, slope, dropout, Init::Fixed(0.0), &mut Stream::new(0));
        m.embedding.table = Param::new(wf.take("embedding", &[NUM_CLASSES, EMBED_DIM])?);
        for (i, layer) in m.layers.iter_mut().enumerate() {
            let (inp, out) = (widths[i], widths[i + 1]);
            layer.weight = Param::new(wf.take(&format!("dense{i}.weight"), &[out, inp])?);
            layer.bias = Param::new(wf.take(&format!("dense{i}.bias"), &[out])?);
        }
        Ok(m)
    }
}

/// Maps `(z, label)` to a spectrum in `(−1, 1)^800`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorNet(pub CondMlp);

/// Scores `(spectrum, label)` pairs with a probability of being real. The
/// underlying stack ends in a logit; the sigmoid is applied by
/// [`DiscriminatorNet::forward`] and folded into the loss during training.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorNet(pub CondMlp);

impl GeneratorNet {
    pub fn new(slope: f64, init: Init, rng: &mut Stream) -> Self {
        GeneratorNet(CondMlp::new(&GENERATOR_WIDTHS, Some(Activation::Tanh), slope, 0.0, init, rng))
    }

    pub fn forward(&self, z: &Tensor, labels: &[usize]) -> Result<Tensor> {
        self.0.infer(z, labels)
    }

    pub fn to_weights(&self) -> WeightFile {
        self.0.to_weights("generator")
    }

    pub fn from_weights(wf: &WeightFile) -> Result<Self> {
        CondMlp::from_weights(wf, "generator", &GENERATOR_WIDTHS, Some(Activation::Tanh)).map(GeneratorNet)
    }
}

impl DiscriminatorNet {
    pub fn new(slope: f64, dropout: f64, init: Init, rng: &mut Stream) -> Self {
        DiscriminatorNet(CondMlp::new(&DISCRIMINATOR_WIDTHS, None, slope, dropout, init, rng))
    }

    /// Probabilities `[batch]`; dropout seeds come from `rng` in train mode.
    pub fn forward(&self, v: &Tensor, labels: &[usize], mode: Mode, rng: &mut Stream) -> Result<Tensor> {
        let (z, _) = self.0.forward(v, labels, mode, rng)?;
        let n = z.len();
        z.map(sigmoid).reshape(&[n])
    }

    pub fn to_weights(&self) -> WeightFile {
        self.0.to_weights("discriminator")
    }

    pub fn from_weights(wf: &WeightFile) -> Result<Self> {
        CondMlp::from_weights(wf, "discriminator", &DISCRIMINATOR_WIDTHS, None).map(DiscriminatorNet)
    }
}

/// Row `class_id` of a network's label table.
pub fn embed_label(net: &CondMlp, class_id: usize) -> Result<Tensor> {
    let row = net.embedding.lookup(&[class_id])?;
    row.reshape(&[EMBED_DIM])
}
