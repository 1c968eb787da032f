use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dsp::{fit_norm, load_spectra, psd, save_spectra, NormStats, SpectrumVector, SPECTRUM_LEN};
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::nn::Tensor;
use crate::rng::{mix, Stream};
use crate::synth::{synthesize_labeled, JammingClass, SynthConfig, NUM_CLASSES};

const JNR_TAG: u64 = 0x4a4e_5247;
const SUBSET_TAG: u64 = 0x5355_4253;

pub const TRAIN_FILE: &str = "train.jspc";
pub const TEST_FILE: &str = "test.jspc";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn default_jnr_grid() -> Vec<f64> {
    (-4..=4).map(|k| 5.0 * k as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRequest {
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub jnr_grid: Vec<f64>,
    pub synth: SynthConfig,
}

impl Default for DatasetRequest {
    fn default() -> Self {
        DatasetRequest {
            train_per_class: 100,
            test_per_class: 400,
            jnr_grid: default_jnr_grid(),
            synth: SynthConfig::default(),
        }
    }
}

impl DatasetRequest {
    pub fn validate(&self) -> Result<()> {
        if self.train_per_class < 1 || self.test_per_class < 1 {
            return Err(Error::param("train and test counts must be at least 1"));
        }
        if self.jnr_grid.is_empty() || self.jnr_grid.iter().any(|j| !j.is_finite()) {
            return Err(Error::param("jnr grid must be a non-empty list of finite values"));
        }
        self.synth.validate()
    }
}

/// Everything needed to reproduce or reload a built dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub classes: Vec<String>,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub jnr_grid: Vec<f64>,
    pub global_seed: u64,
    pub synth: SynthConfig,
    pub norm_stats: NormStats,
    pub train_file: String,
    pub test_file: String,
}

/// Raw dB spectra in class-major order: class 0's samples first.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub train: Vec<SpectrumVector>,
    pub test: Vec<SpectrumVector>,
}

/// Grid JNR assigned to sample `index` of `class`.
pub fn draw_jnr(global_seed: u64, class: JammingClass, index: u64, grid: &[f64]) -> f64 {
    let mut rng = Stream::new(mix(&[global_seed, class.id() as u64, index, JNR_TAG]));
    grid[rng.below(grid.len())]
}

fn spectrum_for(req: &DatasetRequest, class: JammingClass, index: u64) -> Result<SpectrumVector> {
    let jnr = draw_jnr(req.synth.global_seed, class, index, &req.jnr_grid);
    psd(&synthesize_labeled(class, jnr, index, &req.synth)?)
}

/// Synthesises `train + test` samples per class (train takes sample indices
/// `0..train`) and fits normalisation on the train split. Work is spread
/// over `jobs` threads without affecting the result.
pub fn build_dataset(req: &DatasetRequest, jobs: usize) -> Result<Dataset> {
    req.validate()?;
    let per_class = req.train_per_class + req.test_per_class;
    let cells: Vec<(JammingClass, u64)> = JammingClass::ALL
        .iter()
        .flat_map(|&c| (0..per_class as u64).map(move |i| (c, i)))
        .collect();
    let jobs = jobs.clamp(1, cells.len());
    let chunk = cells.len().div_ceil(jobs);
    let spectra: Vec<SpectrumVector> = std::thread::scope(|s| {
        let handles: Vec<_> = cells
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|&(c, i)| spectrum_for(req, c, i)).collect::<Result<Vec<_>>>()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("dataset worker panicked"))
            .collect::<Result<Vec<_>>>()
    })?
    .into_iter()
    .flatten()
    .collect();

    let mut train = Vec::with_capacity(NUM_CLASSES * req.train_per_class);
    let mut test = Vec::with_capacity(NUM_CLASSES * req.test_per_class);
    for class_block in spectra.chunks(per_class) {
        train.extend_from_slice(&class_block[..req.train_per_class]);
        test.extend_from_slice(&class_block[req.train_per_class..]);
    }
    let norm_stats = fit_norm(&train)?;
    let manifest = DatasetManifest {
        classes: JammingClass::ALL.iter().map(|c| c.name().to_string()).collect(),
        train_per_class: req.train_per_class,
        test_per_class: req.test_per_class,
        jnr_grid: req.jnr_grid.clone(),
        global_seed: req.synth.global_seed,
        synth: req.synth,
        norm_stats,
        train_file: TRAIN_FILE.into(),
        test_file: TEST_FILE.into(),
    };
    Ok(Dataset { manifest, train, test })
}

impl Dataset {
    pub fn save(&self, dir: &Path) -> Result<()> {
        let stats = Some(self.manifest.norm_stats);
        save_spectra(&dir.join(&self.manifest.train_file), &self.train, stats)?;
        save_spectra(&dir.join(&self.manifest.test_file), &self.test, stats)?;
        let json = serde_json::to_vec_pretty(&self.manifest)?;
        write_atomic(&dir.join(MANIFEST_FILE), &json)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: DatasetManifest = serde_json::from_slice(&bytes)?;
        let (_, train) = load_spectra(&dir.join(&manifest.train_file))?;
        let (_, test) = load_spectra(&dir.join(&manifest.test_file))?;
        if train.len() != NUM_CLASSES * manifest.train_per_class || test.len() != NUM_CLASSES * manifest.test_per_class {
            return Err(Error::Format { kind: "dataset", msg: "spectrum counts disagree with manifest".into() });
        }
        Ok(Dataset { manifest, train, test })
    }

    /// Test-split indices whose JNR is in `jnrs` (all when `None`).
    pub fn test_indices(&self, jnrs: Option<&[f64]>) -> Vec<usize> {
        (0..self.test.len())
            .filter(|&i| match (jnrs, self.test[i].jnr_db) {
                (None, _) => true,
                (Some(set), Some(j)) => set.iter().any(|&s| (s - j).abs() < 1e-9),
                (Some(_), None) => false,
            })
            .collect()
    }
}

/// How many training samples per class a cell uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetSpec {
    Fraction(f64),
    Shots(usize),
}

impl SubsetSpec {
    pub fn per_class(&self, available: usize) -> Result<usize> {
        let k = match *self {
            SubsetSpec::Fraction(f) if f > 0.0 && f <= 1.0 => (f * available as f64).round().max(1.0) as usize,
            SubsetSpec::Fraction(f) => return Err(Error::param(format!("fraction {f} outside (0, 1]"))),
            SubsetSpec::Shots(0) => return Err(Error::param("shots must be at least 1")),
            SubsetSpec::Shots(k) => k,
        };
        if k > available {
            return Err(Error::param(format!("requested {k} samples per class, only {available} available")));
        }
        Ok(k)
    }

    pub fn label(&self) -> String {
        match *self {
            SubsetSpec::Fraction(f) => format!("frac{f}"),
            SubsetSpec::Shots(k) => format!("shots{k}"),
        }
    }
}

/// Train-split indices for a balanced subset. Each class draws a seeded
/// permutation and keeps its prefix, so smaller subsets nest in larger ones.
pub fn subset_split(manifest: &DatasetManifest, spec: SubsetSpec, seed: u64) -> Result<Vec<usize>> {
    let available = manifest.train_per_class;
    let k = spec.per_class(available)?;
    let mut out = Vec::with_capacity(k * NUM_CLASSES);
    for class in 0..NUM_CLASSES {
        let mut perm: Vec<usize> = (0..available).collect();
        Stream::new(mix(&[seed, class as u64, SUBSET_TAG])).shuffle(&mut perm);
        let mut chosen: Vec<usize> = perm[..k].iter().map(|&i| class * available + i).collect();
        chosen.sort_unstable();
        out.extend(chosen);
    }
    Ok(out)
}

/// Normalised `[n, 800]` matrix and labels for the selected spectra.
pub fn to_tensor(spectra: &[SpectrumVector], idx: &[usize], stats: &NormStats) -> (Tensor, Vec<usize>) {
    let mut data = Vec::with_capacity(idx.len() * SPECTRUM_LEN);
    let mut labels = Vec::with_capacity(idx.len());
    for &i in idx {
        data.extend(spectra[i].bins.iter().map(|&b| stats.forward(b)));
        labels.push(spectra[i].class_id);
    }
    (Tensor::new(vec![idx.len(), SPECTRUM_LEN], data).expect("row lengths fixed"), labels)
}
