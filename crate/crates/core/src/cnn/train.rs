use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::net::CnnNet;
use crate::dsp::argmax;
use crate::error::{Error, Result};
use crate::gan::epoch_batches;
use crate::nn::{cross_entropy, softmax, Mode, Tensor};
use crate::rng::{mix, Stream};
use crate::synth::NUM_CLASSES;

const CNN_TAG: u64 = 0x434e_4e54;
const EVAL_CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierTrainConfig {
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    /// Synthetic samples per real sample and class (`m′ = multiplier·m`).
    pub synth_multiplier: usize,
    pub seed: u64,
}

impl Default for ClassifierTrainConfig {
    fn default() -> Self {
        ClassifierTrainConfig { epochs: 100, batch: 32, lr: 2e-4, synth_multiplier: 4, seed: 0 }
    }
}

impl ClassifierTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 || self.batch < 2 || !(self.lr > 0.0) {
            return Err(Error::param(format!(
                "cnn needs epochs >= 1, batch >= 2 and lr > 0, got {} / {} / {}",
                self.epochs, self.batch, self.lr
            )));
        }
        Ok(())
    }
}

/// A labelled `[n, 800]` matrix of normalised spectra.
#[derive(Debug, Clone, Copy)]
pub struct LabeledSet<'a> {
    pub x: &'a Tensor,
    pub labels: &'a [usize],
}

impl<'a> LabeledSet<'a> {
    pub fn new(x: &'a Tensor, labels: &'a [usize]) -> Result<Self> {
        if x.rank() != 2 || x.dim(0) != labels.len() {
            return Err(Error::param(format!("{} labels for data of shape {:?}", labels.len(), x.shape())));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= NUM_CLASSES) {
            return Err(Error::param(format!("label {bad} outside 0..{NUM_CLASSES}")));
        }
        Ok(LabeledSet { x, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Trains a fresh network on the union of `real` and `synthetic` (equal
/// weights, reshuffled every epoch). Returns the net and per-epoch mean loss.
pub fn train_cnn(
    real: LabeledSet,
    synthetic: Option<LabeledSet>,
    cfg: &ClassifierTrainConfig,
) -> Result<(CnnNet, Vec<f64>)> {
    cfg.validate()?;
    if real.is_empty() {
        return Err(Error::param("cnn training needs at least one real sample"));
    }
    let mut rows = real.x.data().to_vec();
    let mut labels = real.labels.to_vec();
    if let Some(s) = synthetic {
        rows.extend_from_slice(s.x.data());
        labels.extend_from_slice(s.labels);
    }
    let width = real.x.dim(1);
    let all = Tensor::new(vec![labels.len(), width], rows)?;
    if labels.len() < 2 {
        return Err(Error::param("cnn training needs at least two samples for batch statistics"));
    }
    let mut net = CnnNet::new(mix(&[cfg.seed, CNN_TAG, 1]));
    for p in net.params_mut() {
        p.adam.config.lr = cfg.lr;
    }
    let mut shuffle = Stream::new(mix(&[cfg.seed, CNN_TAG, 2]));
    let mut curve = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut total = 0.0;
        for idx in epoch_batches(labels.len(), cfg.batch, &mut shuffle) {
            let x = all.gather_rows(&idx);
            let y: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
            let (logits, cache) = net.forward(&x, Mode::Train)?;
            let (loss, grad) = cross_entropy(&logits, &y)?;
            if !loss.is_finite() {
                return Err(Error::Degenerate(format!("non-finite cnn loss at epoch {epoch}")));
            }
            net.backward(&cache, &grad)?;
            net.params_mut().into_iter().for_each(|p| p.step());
            total += loss * idx.len() as f64;
        }
        curve.push(total / labels.len() as f64);
    }
    Ok((net, curve))
}

/// Predicted classes (lowest index on ties) and softmax probabilities.
pub fn predict(net: &CnnNet, x: &Tensor) -> Result<(Vec<usize>, Tensor)> {
    let n = x.dim(0);
    let mut probs = Vec::with_capacity(n * NUM_CLASSES);
    for start in (0..n).step_by(EVAL_CHUNK) {
        let idx: Vec<usize> = (start..(start + EVAL_CHUNK).min(n)).collect();
        probs.extend_from_slice(softmax(&net.infer(&x.gather_rows(&idx))?).data());
    }
    let probs = Tensor::new(vec![n, NUM_CLASSES], probs)?;
    Ok((predictions_from_probs(&probs), probs))
}

pub fn predictions_from_probs(probs: &Tensor) -> Vec<usize> {
    (0..probs.dim(0)).map(|r| argmax(probs.row(r))).collect()
}

/// Counts with rows = true class, columns = predicted class.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn from_predictions(truth: &[usize], predicted: &[usize]) -> Result<Self> {
        if truth.is_empty() || truth.len() != predicted.len() {
            return Err(Error::param("confusion matrix needs equal, non-empty label lists"));
        }
        let mut m = ConfusionMatrix::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= NUM_CLASSES || p >= NUM_CLASSES {
                return Err(Error::param(format!("class id outside 0..{NUM_CLASSES}")));
            }
            m.counts[t][p] += 1;
        }
        Ok(m)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..NUM_CLASSES).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.correct() as f64 / self.total() as f64
    }

    /// Recall per class; `None` for classes absent from the truth labels.
    pub fn recalls(&self) -> Vec<Option<f64>> {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let n: u64 = row.iter().sum();
                (n > 0).then(|| row[i] as f64 / n as f64)
            })
            .collect()
    }

    /// `counts[a][b] + counts[b][a]`.
    pub fn mutual_confusion(&self, a: usize, b: usize) -> u64 {
        self.counts[a][b] + self.counts[b][a]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for row in &self.counts {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            writeln!(s, "{}", cells.join(",")).unwrap();
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
}

pub fn evaluate(net: &CnnNet, test: LabeledSet) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(Error::param("cannot evaluate on an empty set"));
    }
    let (pred, _) = predict(net, test.x)?;
    let confusion = ConfusionMatrix::from_predictions(test.labels, &pred)?;
    Ok(Evaluation { accuracy: confusion.accuracy(), confusion })
}
