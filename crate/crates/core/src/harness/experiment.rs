use std::fmt::Write as _;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::dataset::{subset_split, to_tensor, Dataset, SubsetSpec};
use super::svg::{heatmap, line_plot};
use crate::cnn::{evaluate, train_cnn, ClassifierTrainConfig, CnnNet, ConfusionMatrix, Evaluation, LabeledSet};
use crate::error::{Error, Result};
use crate::gan::{
    check_equilibrium, sample_augmentation, train_gan, EquilibriumConfig, EquilibriumReport, GanModel,
    GanTrainConfig, LossTrace,
};
use crate::io::write_atomic;
use crate::nn::Tensor;
use crate::rng::mix;
use crate::synth::{JammingClass, NUM_CLASSES};

const GAN_SEED_TAG: u64 = 0x4347_414e;
const AUG_SEED_TAG: u64 = 0x4155_474d;

/// Training settings shared by every cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub gan: GanTrainConfig,
    pub cnn: ClassifierTrainConfig,
    pub equilibrium: EquilibriumConfig,
    /// GAN epochs used instead of `gan.epochs` when a cell has at most
    /// `desk_threshold` samples per class; `None` keeps `gan.epochs`.
    pub desk_gan_epochs: Option<usize>,
    pub desk_threshold: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            gan: GanTrainConfig::default(),
            cnn: ClassifierTrainConfig::default(),
            equilibrium: EquilibriumConfig::default(),
            desk_gan_epochs: Some(800),
            desk_threshold: 10,
        }
    }
}

impl ExperimentConfig {
    /// GAN settings for a cell with `per_class` real samples and `seed`.
    pub fn gan_for(&self, per_class: usize, seed: u64) -> GanTrainConfig {
        let mut g = self.gan.clone();
        if let Some(e) = self.desk_gan_epochs.filter(|_| per_class <= self.desk_threshold) {
            g.epochs = e;
        }
        g.seed = mix(&[self.gan.seed, seed, GAN_SEED_TAG]);
        g
    }

    pub fn cnn_for(&self, seed: u64) -> ClassifierTrainConfig {
        ClassifierTrainConfig { seed: mix(&[self.cnn.seed, seed]), ..self.cnn.clone() }
    }
}

/// One point of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub subset: SubsetSpec,
    pub augmented: bool,
    pub seed: u64,
}

impl Cell {
    pub fn name(&self) -> String {
        format!("{}_{}_s{}", self.subset.label(), if self.augmented { "aug" } else { "noaug" }, self.seed)
    }
}

pub struct GanArtifacts {
    pub model: GanModel,
    pub trace: LossTrace,
    pub equilibrium: EquilibriumReport,
    /// Normalised synthetic spectra added to the classifier's training set.
    pub synthetic: (Tensor, Vec<usize>),
}

pub struct CellResult {
    pub cell: Cell,
    pub per_class: usize,
    /// Train-split indices of the real subset.
    pub subset: Vec<usize>,
    /// `None` when the cell runs without augmentation.
    pub gan: Option<GanArtifacts>,
    pub cnn: CnnNet,
    pub cnn_curve: Vec<f64>,
    /// Evaluation on the whole test split.
    pub overall: Evaluation,
    /// One evaluation per grid JNR present in the test split.
    pub per_jnr: Vec<(f64, Evaluation)>,
}

impl CellResult {
    /// Pooled evaluation over the listed JNR values.
    pub fn evaluation_at(&self, jnrs: &[f64]) -> Result<Evaluation> {
        let mut cm = ConfusionMatrix::default();
        for (j, e) in &self.per_jnr {
            if jnrs.iter().any(|s| (s - j).abs() < 1e-9) {
                for (a, b) in cm.counts.iter_mut().flatten().zip(e.confusion.counts.iter().flatten()) {
                    *a += b;
                }
            }
        }
        if cm.total() == 0 {
            return Err(Error::param(format!("no test samples at JNR {jnrs:?}")));
        }
        Ok(Evaluation { accuracy: cm.accuracy(), confusion: cm })
    }
}

/// Subset, optional GAN augmentation (`m′ = multiplier·m` per class),
/// classifier training, and evaluation on the test split.
pub fn run_cell(dataset: &Dataset, cell: Cell, cfg: &ExperimentConfig) -> Result<CellResult> {
    let manifest = &dataset.manifest;
    let stats = &manifest.norm_stats;
    let subset = subset_split(manifest, cell.subset, cell.seed)?;
    let per_class = subset.len() / NUM_CLASSES;
    let (x, y) = to_tensor(&dataset.train, &subset, stats);

    let gan = if cell.augmented && cfg.cnn.synth_multiplier > 0 {
        let gcfg = cfg.gan_for(per_class, cell.seed);
        let (model, trace) = train_gan(&x, &y, &gcfg)?;
        let equilibrium = check_equilibrium(&trace, &cfg.equilibrium)?;
        let counts = [per_class * cfg.cnn.synth_multiplier; NUM_CLASSES];
        let synthetic = sample_augmentation(&model.generator, &counts, mix(&[cell.seed, AUG_SEED_TAG]))?;
        Some(GanArtifacts { model, trace, equilibrium, synthetic })
    } else {
        None
    };

    let real = LabeledSet::new(&x, &y)?;
    let synth = match &gan {
        Some(g) => Some(LabeledSet::new(&g.synthetic.0, &g.synthetic.1)?),
        None => None,
    };
    let (cnn, cnn_curve) = train_cnn(real, synth, &cfg.cnn_for(cell.seed))?;

    let all: Vec<usize> = (0..dataset.test.len()).collect();
    let (tx, ty) = to_tensor(&dataset.test, &all, stats);
    let overall = evaluate(&cnn, LabeledSet::new(&tx, &ty)?)?;
    let mut per_jnr = Vec::new();
    let (pred, _) = crate::cnn::predict(&cnn, &tx)?;
    for &j in &manifest.jnr_grid {
        let idx = dataset.test_indices(Some(&[j]));
        if idx.is_empty() {
            continue;
        }
        let truth: Vec<usize> = idx.iter().map(|&i| ty[i]).collect();
        let p: Vec<usize> = idx.iter().map(|&i| pred[i]).collect();
        let confusion = ConfusionMatrix::from_predictions(&truth, &p)?;
        per_jnr.push((j, Evaluation { accuracy: confusion.accuracy(), confusion }));
    }
    Ok(CellResult { cell, per_class, subset, gan, cnn, cnn_curve, overall, per_jnr })
}

pub fn class_names() -> Vec<String> {
    JammingClass::ALL.iter().map(|c| c.name().to_string()).collect()
}

pub fn confusion_svg(title: &str, cm: &ConfusionMatrix) -> String {
    heatmap(title, &class_names(), &cm.counts.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
}

/// Writes a cell's checkpoints, traces and confusion matrix into `dir`. The
/// generator checkpoint exists only for augmented cells.
pub fn write_cell_outputs(dir: &Path, r: &CellResult) -> Result<()> {
    let name = r.cell.name();
    write_atomic(&dir.join(format!("confusion_{name}.csv")), r.overall.confusion.to_csv().as_bytes())?;
    write_atomic(
        &dir.join(format!("confusion_{name}.svg")),
        confusion_svg(&format!("{name}: accuracy {:.3}", r.overall.accuracy), &r.overall.confusion).as_bytes(),
    )?;
    r.cnn.to_weights().save(&dir.join(format!("cnn_{name}.jwgt")))?;
    let mut curve = String::from("epoch,loss\n");
    for (i, l) in r.cnn_curve.iter().enumerate() {
        writeln!(curve, "{},{l}", i + 1).unwrap();
    }
    write_atomic(&dir.join(format!("cnn_loss_{name}.csv")), curve.as_bytes())?;
    if let Some(g) = &r.gan {
        g.model.generator.to_weights().save(&dir.join(format!("generator_{name}.jwgt")))?;
        g.model.discriminator.to_weights().save(&dir.join(format!("discriminator_{name}.jwgt")))?;
        write_atomic(&dir.join(format!("gan_loss_{name}.csv")), g.trace.to_csv().as_bytes())?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub subsets: Vec<SubsetSpec>,
    pub seeds: Vec<u64>,
    /// Augmentation settings to run; `false` is the ablation.
    pub augmented: Vec<bool>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            subsets: [1.0, 0.5, 0.3, 0.1].into_iter().map(SubsetSpec::Fraction).collect(),
            seeds: vec![0, 1, 2],
            augmented: vec![true, false],
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.subsets.is_empty() || self.seeds.is_empty() || self.augmented.is_empty() {
            return Err(Error::param("sweep needs at least one subset, seed and augmentation setting"));
        }
        for s in &self.subsets {
            s.per_class(usize::MAX)?;
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &subset in &self.subsets {
            for &augmented in &self.augmented {
                for &seed in &self.seeds {
                    out.push(Cell { subset, augmented, seed });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub subset: String,
    pub jnr_db: f64,
    pub seed: u64,
    pub augmented: bool,
    pub accuracy: f64,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("subset,jnr_db,seed,augmented,accuracy\n");
    for r in rows {
        writeln!(s, "{},{},{},{},{}", r.subset, r.jnr_db, r.seed, r.augmented, r.accuracy).unwrap();
    }
    s
}

fn rows_of(r: &CellResult) -> Vec<SweepRow> {
    r.per_jnr
        .iter()
        .map(|(j, e)| SweepRow {
            subset: r.cell.subset.label(),
            jnr_db: *j,
            seed: r.cell.seed,
            augmented: r.cell.augmented,
            accuracy: e.accuracy,
        })
        .collect()
}

/// Mean accuracy per JNR for one `(subset, augmented)` series.
pub fn mean_curve(rows: &[SweepRow], subset: &str, augmented: bool) -> Vec<(f64, f64)> {
    let mut by_jnr: Vec<(f64, f64, usize)> = Vec::new();
    for r in rows.iter().filter(|r| r.subset == subset && r.augmented == augmented) {
        match by_jnr.iter_mut().find(|(j, _, _)| (j - r.jnr_db).abs() < 1e-9) {
            Some(e) => {
                e.1 += r.accuracy;
                e.2 += 1;
            }
            None => by_jnr.push((r.jnr_db, r.accuracy, 1)),
        }
    }
    by_jnr.sort_by(|a, b| a.0.total_cmp(&b.0));
    by_jnr.into_iter().map(|(j, s, n)| (j, s / n as f64)).collect()
}

/// Runs every cell of the grid on up to `jobs` threads. After each finished
/// cell, `sweep.csv` (rows of all finished cells, in grid order) and the
/// cell's outputs are rewritten in `out`, so a failure keeps earlier results.
pub fn run_sweep(dataset: &Dataset, sweep: &SweepConfig, cfg: &ExperimentConfig, out: &Path, jobs: usize) -> Result<Vec<SweepRow>> {
    sweep.validate()?;
    let cells = sweep.cells();
    let done: Mutex<Vec<Option<Vec<SweepRow>>>> = Mutex::new(vec![None; cells.len()]);
    let next = Mutex::new(0usize);
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let flush = |done: &[Option<Vec<SweepRow>>]| {
        let rows: Vec<SweepRow> = done.iter().flatten().flatten().cloned().collect();
        write_atomic(&out.join("sweep.csv"), sweep_csv(&rows).as_bytes())
    };
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, cells.len()) {
            s.spawn(|| loop {
                let i = {
                    let mut n = next.lock().unwrap();
                    if *n >= cells.len() || failure.lock().unwrap().is_some() {
                        return;
                    }
                    *n += 1;
                    *n - 1
                };
                let outcome = run_cell(dataset, cells[i], cfg).and_then(|r| {
                    write_cell_outputs(out, &r)?;
                    let mut d = done.lock().unwrap();
                    d[i] = Some(rows_of(&r));
                    flush(&d)
                });
                if let Err(e) = outcome {
                    failure.lock().unwrap().get_or_insert(e);
                    return;
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let rows: Vec<SweepRow> = done.into_inner().unwrap().into_iter().flatten().flatten().collect();
    for subset in &sweep.subsets {
        let label = subset.label();
        let series: Vec<(String, Vec<(f64, f64)>)> = sweep
            .augmented
            .iter()
            .map(|&a| (if a { "augmented" } else { "no augmentation" }.to_string(), mean_curve(&rows, &label, a)))
            .collect();
        let svg = line_plot(&format!("accuracy vs JNR ({label})"), "JNR (dB)", "accuracy", &series);
        write_atomic(&out.join(format!("accuracy_{label}.svg")), svg.as_bytes())?;
    }
    Ok(rows)
}
