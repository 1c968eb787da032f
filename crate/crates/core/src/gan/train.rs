use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::net::{Init, DiscriminatorNet, GeneratorNet, DEFAULT_DROPOUT, NOISE_LEN, SPECTRUM_WIDTH};
use crate::error::{Error, Result};
use crate::nn::{bce_with_logits, Mode, Tensor, DEFAULT_LEAKY_SLOPE};
use crate::rng::{mix, Stream};

const TRAIN_TAG: u64 = 0x4741_4e54;
const SAMPLE_TAG: u64 = 0x4741_4e53;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanTrainConfig {
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub beta1: f64,
    pub leaky_slope: f64,
    pub dropout: f64,
    pub init: Init,
    pub seed: u64,
}

impl Default for GanTrainConfig {
    fn default() -> Self {
        GanTrainConfig {
            epochs: 3200,
            batch: 128,
            lr: 2e-4,
            beta1: 0.5,
            leaky_slope: DEFAULT_LEAKY_SLOPE,
            dropout: DEFAULT_DROPOUT,
            init: Init::He,
            seed: 0,
        }
    }
}

impl GanTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 || self.batch < 2 {
            return Err(Error::param(format!(
                "gan needs epochs >= 1 and batch >= 2, got {} / {}",
                self.epochs, self.batch
            )));
        }
        if !(self.lr > 0.0) || !(self.leaky_slope > 0.0) || !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::param("gan lr and slope must be positive, dropout in [0, 1)"));
        }
        if !(0.0..1.0).contains(&self.beta1) {
            return Err(Error::param(format!("gan beta1 must be in [0, 1), got {}", self.beta1)));
        }
        Ok(())
    }
}

/// Per-optimizer-step discriminator and generator losses.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossTrace {
    pub l_d: Vec<f64>,
    pub l_g: Vec<f64>,
}

impl LossTrace {
    pub fn push(&mut self, l_d: f64, l_g: f64) {
        self.l_d.push(l_d);
        self.l_g.push(l_g);
    }

    pub fn len(&self) -> usize {
        self.l_d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.l_d.is_empty()
    }

    pub fn all_finite(&self) -> bool {
        self.l_d.iter().chain(&self.l_g).all(|v| v.is_finite())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,l_d,l_g\n");
        for (i, (d, g)) in self.l_d.iter().zip(&self.l_g).enumerate() {
            writeln!(s, "{},{d},{g}", i + 1).unwrap();
        }
        s
    }
}

pub struct GanModel {
    pub generator: GeneratorNet,
    pub discriminator: DiscriminatorNet,
}

impl GanModel {
    /// Fresh networks initialised from `cfg.seed`.
    pub fn new(cfg: &GanTrainConfig) -> Self {
        let mut rng = Stream::new(mix(&[cfg.seed, TRAIN_TAG, 1]));
        let mut generator = GeneratorNet::new(cfg.leaky_slope, cfg.init, &mut rng);
        let mut discriminator = DiscriminatorNet::new(cfg.leaky_slope, cfg.dropout, cfg.init, &mut rng);
        for p in generator.0.params_mut().into_iter().chain(discriminator.0.params_mut()) {
            p.adam.config.lr = cfg.lr;
            p.adam.config.beta1 = cfg.beta1;
        }
        GanModel { generator, discriminator }
    }
}

fn noise(n: usize, rng: &mut Stream) -> Tensor {
    Tensor::randn(&[n, NOISE_LEN], 1.0, rng)
}

fn check_batch(real: &Tensor, labels: &[usize]) -> Result<()> {
    if labels.len() < 2 {
        return Err(Error::param(format!("gan batch needs at least 2 samples, got {}", labels.len())));
    }
    real.require_shape(&[labels.len(), SPECTRUM_WIDTH], "real batch")
}

/// One Adam step of the discriminator on `BCE(D(x), 1) + BCE(D(G(z)), 0)`;
/// the generator output is treated as a constant. Returns `l_d`.
pub fn discriminator_step(
    g: &GeneratorNet,
    d: &mut DiscriminatorNet,
    real: &Tensor,
    labels: &[usize],
    rng: &mut Stream,
) -> Result<f64> {
    check_batch(real, labels)?;
    let n = labels.len();
    let fake = g.forward(&noise(n, rng), labels)?;
    let (z_real, c_real) = d.0.forward(real, labels, Mode::Train, rng)?;
    let (z_fake, c_fake) = d.0.forward(&fake, labels, Mode::Train, rng)?;
    let (l_real, g_real) = bce_with_logits(&z_real, &Tensor::full(&[n, 1], 1.0))?;
    let (l_fake, g_fake) = bce_with_logits(&z_fake, &Tensor::zeros(&[n, 1]))?;
    d.0.zero_grad();
    d.0.backward(&c_real, &g_real, true)?;
    d.0.backward(&c_fake, &g_fake, true)?;
    d.0.step();
    Ok(l_real + l_fake)
}

/// One Adam step of the generator on `BCE(D(G(z)), 1)` with fresh noise; the
/// discriminator's parameters receive no gradient. Returns `l_g`.
pub fn generator_step(g: &mut GeneratorNet, d: &mut DiscriminatorNet, labels: &[usize], rng: &mut Stream) -> Result<f64> {
    let n = labels.len();
    if n < 2 {
        return Err(Error::param(format!("gan batch needs at least 2 samples, got {n}")));
    }
    let (fake, c_g) = g.0.forward(&noise(n, rng), labels, Mode::Train, rng)?;
    let (z, c_d) = d.0.forward(&fake, labels, Mode::Train, rng)?;
    let (l_g, grad) = bce_with_logits(&z, &Tensor::full(&[n, 1], 1.0))?;
    let grad_fake = d.0.backward(&c_d, &grad, false)?;
    g.0.zero_grad();
    g.0.backward(&c_g, &grad_fake, true)?;
    g.0.step();
    Ok(l_g)
}

/// Discriminator step then generator step; returns `(l_d, l_g)`.
pub fn gan_train_step(model: &mut GanModel, real: &Tensor, labels: &[usize], rng: &mut Stream) -> Result<(f64, f64)> {
    let l_d = discriminator_step(&model.generator, &mut model.discriminator, real, labels, rng)?;
    let l_g = generator_step(&mut model.generator, &mut model.discriminator, labels, rng)?;
    Ok((l_d, l_g))
}

/// Shuffled minibatches of `batch` indices; a trailing single sample joins
/// the previous batch.
pub fn epoch_batches(n: usize, batch: usize, rng: &mut Stream) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let mut batches: Vec<Vec<usize>> = order.chunks(batch.max(1)).map(<[usize]>::to_vec).collect();
    if batches.len() > 1 && batches.last().is_some_and(|b| b.len() == 1) {
        let tail = batches.pop().unwrap();
        batches.last_mut().unwrap().extend(tail);
    }
    batches
}

/// Trains a fresh model for `cfg.epochs` epochs. The batch size is clamped
/// to the dataset size. `on_epoch(epoch, trace)` runs after every epoch.
pub fn train_gan_with(
    data: &Tensor,
    labels: &[usize],
    cfg: &GanTrainConfig,
    on_epoch: impl FnMut(usize, &LossTrace),
) -> Result<(GanModel, LossTrace)> {
    train_gan_model(GanModel::new(cfg), data, labels, cfg, on_epoch)
}

/// Continues training `model` (fresh or loaded) with the schedule of `cfg`.
pub fn train_gan_model(
    mut model: GanModel,
    data: &Tensor,
    labels: &[usize],
    cfg: &GanTrainConfig,
    mut on_epoch: impl FnMut(usize, &LossTrace),
) -> Result<(GanModel, LossTrace)> {
    cfg.validate()?;
    check_batch(data, labels)?;
    let mut shuffle = Stream::new(mix(&[cfg.seed, TRAIN_TAG, 2]));
    let mut rng = Stream::new(mix(&[cfg.seed, TRAIN_TAG, 3]));
    let batch = cfg.batch.min(labels.len());
    let mut trace = LossTrace::default();
    for epoch in 0..cfg.epochs {
        for idx in epoch_batches(labels.len(), batch, &mut shuffle) {
            let real = data.gather_rows(&idx);
            let y: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
            let (l_d, l_g) = gan_train_step(&mut model, &real, &y, &mut rng)?;
            if !(l_d.is_finite() && l_g.is_finite()) {
                return Err(Error::Degenerate(format!("non-finite gan loss at epoch {epoch}")));
            }
            trace.push(l_d, l_g);
        }
        on_epoch(epoch, &trace);
    }
    Ok((model, trace))
}

pub fn train_gan(data: &Tensor, labels: &[usize], cfg: &GanTrainConfig) -> Result<(GanModel, LossTrace)> {
    train_gan_with(data, labels, cfg, |_, _| {})
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumConfig {
    pub band: (f64, f64),
    pub window_fraction: f64,
    /// Largest tolerated |fitted slope × window length| for either loss.
    pub max_drift: f64,
}

impl Default for EquilibriumConfig {
    fn default() -> Self {
        EquilibriumConfig { band: (0.3, 1.4), window_fraction: 0.1, max_drift: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub converged: bool,
    pub mean_d: f64,
    pub mean_g: f64,
    pub drift_d: f64,
    pub drift_g: f64,
    pub window: usize,
}

fn mean_and_drift(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    if y.len() < 2 {
        return (mean, 0.0);
    }
    let tbar = (n - 1.0) / 2.0;
    let (mut sty, mut stt) = (0.0, 0.0);
    for (i, v) in y.iter().enumerate() {
        let t = i as f64 - tbar;
        sty += t * (v - mean);
        stt += t * t;
    }
    (mean, sty / stt * (n - 1.0))
}

/// Checks the trailing window of a trace: both loss means inside the band
/// and neither drifting by more than `max_drift` across the window.
pub fn check_equilibrium(trace: &LossTrace, cfg: &EquilibriumConfig) -> Result<EquilibriumReport> {
    if trace.is_empty() {
        return Err(Error::param("empty loss trace"));
    }
    let window = ((trace.len() as f64 * cfg.window_fraction).ceil() as usize).clamp(1, trace.len());
    let start = trace.len() - window;
    let (mean_d, drift_d) = mean_and_drift(&trace.l_d[start..]);
    let (mean_g, drift_g) = mean_and_drift(&trace.l_g[start..]);
    let (lo, hi) = cfg.band;
    let in_band = |m: f64| (lo..=hi).contains(&m);
    let converged = in_band(mean_d)
        && in_band(mean_g)
        && drift_d.abs() <= cfg.max_drift
        && drift_g.abs() <= cfg.max_drift;
    Ok(EquilibriumReport { converged, mean_d, mean_g, drift_d, drift_g, window })
}

/// `count` eval-mode generator outputs for `class_id`, rows of `[count, 800]`.
pub fn sample_synthetic(g: &GeneratorNet, class_id: usize, count: usize, seed: u64) -> Result<Tensor> {
    if count == 0 {
        return Ok(Tensor::zeros(&[0, SPECTRUM_WIDTH]));
    }
    let mut rng = Stream::new(mix(&[seed, SAMPLE_TAG, class_id as u64]));
    g.forward(&noise(count, &mut rng), &vec![class_id; count])
}

/// Synthetic set `counts[c]` per class, stacked in class order with labels.
pub fn sample_augmentation(g: &GeneratorNet, counts: &[usize], seed: u64) -> Result<(Tensor, Vec<usize>)> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (class, &count) in counts.iter().enumerate() {
        rows.extend_from_slice(sample_synthetic(g, class, count, seed)?.data());
        labels.extend(std::iter::repeat_n(class, count));
    }
    Ok((Tensor::new(vec![labels.len(), SPECTRUM_WIDTH], rows)?, labels))
}
