use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use jamcgan_core::cnn::{evaluate, train_cnn, ClassifierTrainConfig, CnnNet, LabeledSet};
use jamcgan_core::dsp::{load_spectra, psd, save_spectra, SpectrumVector};
use jamcgan_core::gan::{
    check_equilibrium, sample_augmentation, train_gan, DiscriminatorNet, EquilibriumConfig, GanTrainConfig,
    GeneratorNet, Init,
};
use jamcgan_core::harness::svg::{line_plot, scatter};
use jamcgan_core::harness::{
    build_dataset, class_names, confusion_svg, count_flops, default_jnr_grid, draw_jnr, run_sweep, subset_split,
    to_tensor, tsne_project, Dataset, DatasetRequest, ExperimentConfig, Source, SubsetSpec, SweepConfig, TsneConfig,
    REFERENCE_FLOPS, REFERENCE_PARAMS,
};
use jamcgan_core::io::write_atomic;
use jamcgan_core::nn::{Tensor, WeightFile, DEFAULT_LEAKY_SLOPE};
use jamcgan_core::rng::Stream;
use jamcgan_core::synth::iqfile::{load_capture, save_capture};
use jamcgan_core::synth::{synthesize_labeled, JammingClass, SynthConfig, NUM_CLASSES};
use serde_json::json;

use crate::config::{invalid, Settings};
use crate::error::CliError;

const DEFAULT_OUT: &str = "jamcgan-out";

type Outcome = Result<String, CliError>;

/// Output directory plus the settings snapshot written next to the outputs.
struct Run {
    out: PathBuf,
    name: &'static str,
}

impl Run {
    fn new(s: &mut Settings, name: &'static str) -> Result<Self, CliError> {
        let out: String = s.get("out", DEFAULT_OUT.to_string())?;
        Ok(Run { out: PathBuf::from(out), name })
    }

    fn path(&self, file: &str) -> PathBuf {
        self.out.join(file)
    }

    fn write(&self, file: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let p = self.path(file);
        write_atomic(&p, bytes)?;
        Ok(p)
    }

    fn snapshot(&self, s: &Settings) -> Result<(), CliError> {
        self.write(&format!("{}.config", self.name), s.snapshot().as_bytes()).map(|_| ())
    }

    fn data_dir(&self, s: &mut Settings) -> Result<PathBuf, CliError> {
        let d: String = s.get("data", self.out.display().to_string())?;
        Ok(PathBuf::from(d))
    }
}

fn subset(s: &mut Settings) -> Result<SubsetSpec, CliError> {
    match (s.optional::<usize>("shots")?, s.optional::<f64>("fraction")?) {
        (Some(_), Some(_)) => Err(invalid("shots", "set either shots or fraction, not both")),
        (Some(0), None) => Err(invalid("shots", "must be at least 1")),
        (Some(k), None) => Ok(SubsetSpec::Shots(k)),
        (None, Some(f)) if f > 0.0 && f <= 1.0 => Ok(SubsetSpec::Fraction(f)),
        (None, Some(f)) => Err(invalid("fraction", format!("{f} outside (0, 1]"))),
        (None, None) => Ok(SubsetSpec::Fraction(1.0)),
    }
}

fn positive(s: &mut Settings, key: &str, default: usize) -> Result<usize, CliError> {
    let v = s.get(key, default)?;
    if v == 0 {
        return Err(invalid(key, "must be at least 1"));
    }
    Ok(v)
}

fn load_dataset(dir: &Path) -> Result<Dataset, CliError> {
    Ok(Dataset::load(dir)?)
}

fn lines_csv(header: &str, values: &[f64]) -> String {
    let mut s = format!("{header}\n");
    for (i, v) in values.iter().enumerate() {
        writeln!(s, "{},{v}", i + 1).unwrap();
    }
    s
}

pub fn generate(mut s: Settings) -> Outcome {
    let run = Run::new(&mut s, "generate")?;
    let seed: u64 = s.require("seed")?;
    let classes: String = s.get("classes", "all".to_string())?;
    if classes != "all" {
        return Err(invalid("classes", "only `all` is supported; datasets cover the eight classes evenly"));
    }
    let train = positive(&mut s, "train", 100)?;
    let test = positive(&mut s, "test", 400)?;
    let jnr_grid = s.list("jnr", default_jnr_grid())?;
    if jnr_grid.is_empty() {
        return Err(invalid("jnr", "needs at least one value"));
    }
    let base = SynthConfig::with_seed(seed);
    let synth = SynthConfig {
        fs: s.get("fs", base.fs)?,
        n_raw: s.get("n_raw", base.n_raw)?,
        noise_power: s.get("noise_power", base.noise_power)?,
        ..base
    };
    synth.validate().map_err(|e| invalid("fs/n_raw/noise_power", e))?;
    let iq_per_class: usize = s.get("iq_per_class", 0)?;
    let jobs = positive(&mut s, "jobs", 1)?;
    s.finish()?;

    let req = DatasetRequest { train_per_class: train, test_per_class: test, jnr_grid, synth };
    let ds = build_dataset(&req, jobs)?;
    ds.save(&run.out)?;
    for class in JammingClass::ALL {
        for i in 0..iq_per_class.min(train) as u64 {
            let jnr = draw_jnr(seed, class, i, &req.jnr_grid);
            let cap = synthesize_labeled(class, jnr, i, &synth)?;
            save_capture(&run.path(&format!("iq/{}_{i}.jsiq", class.name())), &cap)?;
        }
    }
    run.snapshot(&s)?;
    Ok(format!(
        "{} spectra written; manifest {}",
        ds.train.len() + ds.test.len(),
        run.path(jamcgan_core::harness::dataset::MANIFEST_FILE).display()
    ))
}

pub fn preprocess(mut s: Settings) -> Outcome {
    let run = Run::new(&mut s, "preprocess")?;
    let inputs: Vec<String> = s.list("input", Vec::new())?;
    if inputs.is_empty() {
        return Err(invalid("input", "needs at least one capture file"));
    }
    s.finish()?;
    let spectra = inputs
        .iter()
        .map(|p| psd(&load_capture(Path::new(p))?))
        .collect::<jamcgan_core::Result<Vec<SpectrumVector>>>()?;
    let path = run.path("spectra.jspc");
    save_spectra(&path, &spectra, None)?;
    run.snapshot(&s)?;
    Ok(format!("{} spectra written to {}", spectra.len(), path.display()))
}

pub fn train_gan_cmd(mut s: Settings) -> Outcome {
    let run = Run::new(&mut s, "train-gan")?;
    let seed: u64 = s.require("seed")?;
    let data = run.data_dir(&mut s)?;
    let spec = subset(&mut s)?;
    let d = GanTrainConfig::default();
    let init: String = s.get("init", "he".to_string())?;
    let init = match init.as_str() {
        "he" => Init::He,
        other => match other.parse::<f64>() {
            Ok(std) if std > 0.0 => Init::Fixed(std),
            _ => return Err(invalid("init", "expected `he` or a positive standard deviation")),
        },
    };
    let cfg = GanTrainConfig {
        epochs: positive(&mut s, "epochs", d.epochs)?,
        batch: s.get("batch", d.batch)?,
        lr: s.get("lr", d.lr)?,
        beta1: s.get("beta1", d.beta1)?,
        leaky_slope: s.get("slope", DEFAULT_LEAKY_SLOPE)?,
        dropout: s.get("dropout", d.dropout)?,
        init,
        seed,
    };
    cfg.validate().map_err(|e| invalid("epochs/batch/lr/beta1/slope/dropout", e))?;
    let augment: bool = s.get("augment", true)?;
    s.finish()?;
    if !augment {
        run.snapshot(&s)?;
        return Ok("augmentation disabled; no generator trained".into());
    }

    let ds = load_dataset(&data)?;
    let idx = subset_split(&ds.manifest, spec, seed)?;
    let per_class = idx.len() / NUM_CLASSES;
    let (x, y) = to_tensor(&ds.train, &idx, &ds.manifest.norm_stats);
    let (model, trace) = train_gan(&x, &y, &cfg)?;
    let eq = check_equilibrium(&trace, &EquilibriumConfig::default())?;

    let tag = |mut wf: WeightFile| {
        wf.meta["per_class"] = json!(per_class);
        wf.meta["subset"] = json!(spec.label());
        wf.meta["seed"] = json!(seed);
        wf
    };
    let gpath = run.path("generator.jwgt");
    tag(model.discriminator.to_weights()).save(&run.path("discriminator.jwgt"))?;
    tag(model.generator.to_weights()).save(&gpath)?;
    run.write("gan_loss.csv", trace.to_csv().as_bytes())?;
    let pts = |v: &[f64]| v.iter().enumerate().map(|(i, &l)| ((i + 1) as f64, l)).collect::<Vec<_>>();
    let series = vec![("L_D".to_string(), pts(&trace.l_d)), ("L_G".to_string(), pts(&trace.l_g))];
    run.write("gan_loss.svg", line_plot("GAN losses", "step", "loss", &series).as_bytes())?;
    run.write("equilibrium.json", &serde_json::to_vec_pretty(&eq).map_err(jamcgan_core::Error::from)?)?;
    run.snapshot(&s)?;
    Ok(format!(
        "generator {} ({} steps, mean L_D {:.3}, mean L_G {:.3}, equilibrium {})",
        gpath.display(),
        trace.len(),
        eq.mean_d,
        eq.mean_g,
        if eq.converged { "reached" } else { "not reached" }
    ))
}

pub fn augment(mut s: Settings) -> Outcome {
    let run = Run::new(&mut s, "augment")?;
    let seed: u64 = s.require("seed")?;
    let data = run.data_dir(&mut s)?;
    let gpath: String = s.get("generator", run.path("generator.jwgt").display().to_string())?;
    let multiplier = positive(&mut s, "multiplier", 4)?;
    let count: Option<usize> = s.optional("count")?;
    if count == Some(0) {
        return Err(invalid("count", "must be at least 1"));
    }
    s.finish()?;

    let wf = WeightFile::load(Path::new(&gpath))?;
    let g = GeneratorNet::from_weights(&wf)?;
    let per_class = match count {
        Some(c) => c,
        None => {
            let m = wf.meta["per_class"]
                .as_u64()
                .ok_or_else(|| CliError::Runtime(format!("{gpath} does not record its training size; set count")))?;
            m as usize * multiplier
        }
    };
    let stats = load_dataset(&data)?.manifest.norm_stats;
    let (sx, sy) = sample_augmentation(&g, &[per_class; NUM_CLASSES], seed)?;
    let spectra: Vec<SpectrumVector> = sy
        .iter()
        .enumerate()
        .map(|(i, &c)| SpectrumVector { bins: sx.row(i).iter().map(|&v| stats.inverse(v)).collect(), class_id: c, jnr_db: None })
        .collect();
    let path = run.path("synthetic.jspc");
    save_spectra(&path, &spectra, Some(stats))?;
    run.snapshot(&s)?;
    Ok(format!("{per_class} synthetic spectra per class written to {}", path.display()))
}

pub fn train_cnn_cmd(mut s: Settings) -> Outcome {
    let run = Run::new(&mut s, "train-cnn")?;
    let seed: u64 = s.require("seed")?;
    let data = run.data_dir(&mut s)?;
    let spec = subset(&mut s)?;
    let d = ClassifierTrainConfig::default();
    let cfg = ClassifierTrainConfig {
        epochs: positive(&mut s, "epochs", d.epochs)?,
        batch: s.get("batch", d.batch)?,
        lr: s.get("lr", d.lr)?,
        seed,
        ..d
    };
    cfg.validate().map_err(|e| invalid("epochs/batch/lr", e))?;
    let augment: bool = s.get("augment", true)?;
    let synth_path = if augment {
        Some(s.get("synthetic", run.path("synthetic.jspc").display().to_string())?)
    } else {
        s.optional::<String>("synthetic")?;
        None
    };
    s.finish()?;

    let ds = load_dataset(&data)?;
    let stats = ds.manifest.norm_stats;
    let idx = subset_split(&ds.manifest, spec, seed)?;
    let (x, y) = to_tensor(&ds.train, &idx, &stats);
    let synth = match &synth_path {
        Some(p) => {
            let (_, spectra) = load_spectra(Path::new(p))?;
            let all: Vec<usize> = (0..spectra.len()).collect();
            Some(to_tensor(&spectra, &all, &stats))
        }
        None => None,
    };
    let synth_set = match &synth {
        Some((sx, sy)) => Some(LabeledSet::new(sx, sy)?),
        None => None,
    };
    let (net, curve) = train_cnn(LabeledSet::new(&x, &y)?, synth_set, &cfg)?;
    let mut wf = net.to_weights();
    wf.meta["subset"] = json!(spec.label());
    wf.meta["seed"] = json!(seed);
    let path = run.path("cnn.jwgt");
    wf.save(&path)?;
    run.write("cnn_loss.csv", lines_csv("epoch,loss", &curve).as_bytes())?;
    run.snapshot(&s)?;
    Ok(format!(
        "cnn {} ({} real + {} synthetic samples, final loss {:.4})",
        path.display(),
        y.len(),
        synth.as_ref().map_or(0, |(_, l)| l.len()),
        curve.last().copied().unwrap_or(f64::NAN)
    ))
}

pub fn evaluate_cmd(mut s: Settings) -> Outcome {
    let run = Run::new(&mut s, "evaluate")?;
    let data = run.data_dir(&mut s)?;
    let cnn_path: String = s.get("cnn", run.path("cnn.jwgt").display().to_string())?;
    let split: String = s.get("split", "test".to_string())?;
    let seed: u64 = s.get("seed", 0)?;
    let (jnr, spec) = match split.as_str() {
        "test" => (s.optional_list::<f64>("jnr")?, None),
        "train" => (None, Some(subset(&mut s)?)),
        _ => return Err(invalid("split", "expected `test` or `train`")),
    };
    s.finish()?;

    let ds = load_dataset(&data)?;
    let stats = ds.manifest.norm_stats;
    let net = CnnNet::from_weights(&WeightFile::load(Path::new(&cnn_path))?)?;
    let (spectra, idx) = match spec {
        Some(spec) => (&ds.train, subset_split(&ds.manifest, spec, seed)?),
        None => (&ds.test, ds.test_indices(jnr.as_deref())),
    };
    if idx.is_empty() {
        return Err(invalid("jnr", "selects no test samples"));
    }
    let (x, y) = to_tensor(spectra, &idx, &stats);
    let eval = evaluate(&net, LabeledSet::new(&x, &y)?)?;
    run.write("confusion.csv", eval.confusion.to_csv().as_bytes())?;
    let title = format!("{split} split: accuracy {:.3}", eval.accuracy);
    run.write("confusion.svg", confusion_svg(&title, &eval.confusion).as_bytes())?;
    let report = json!({
        "split": split,
        "samples": idx.len(),
        "accuracy": eval.accuracy,
        "recalls": eval.confusion.recalls(),
        "classes": class_names(),
    });
    run.write("evaluation.json", &serde_json::to_vec_pretty(&report).map_err(jamcgan_core::Error::from)?)?;
    run.snapshot(&s)?;
    Ok(format!("accuracy {:.3}", eval.accuracy))
}

pub fn sweep(mut s: Settings) -> Outcome {
    let run = Run::new(&mut s, "sweep")?;
    let data = run.data_dir(&mut s)?;
    let fractions: Option<Vec<f64>> = s.optional_list("fractions")?;
    let shots: Option<Vec<usize>> = s.optional_list("shots")?;
    let mut subsets: Vec<SubsetSpec> = Vec::new();
    if fractions.is_none() && shots.is_none() {
        subsets.extend(SweepConfig::default().subsets);
    }
    subsets.extend(fractions.unwrap_or_default().into_iter().map(SubsetSpec::Fraction));
    subsets.extend(shots.unwrap_or_default().into_iter().map(SubsetSpec::Shots));
    let seeds = positive(&mut s, "seeds", 3)?;
    let augment: bool = s.get("augment", true)?;
    let mut cfg = ExperimentConfig::default();
    cfg.gan.epochs = positive(&mut s, "gan_epochs", cfg.gan.epochs)?;
    cfg.gan.beta1 = s.get("beta1", cfg.gan.beta1)?;
    cfg.cnn.epochs = positive(&mut s, "cnn_epochs", cfg.cnn.epochs)?;
    cfg.cnn.synth_multiplier = s.get("multiplier", cfg.cnn.synth_multiplier)?;
    let desk: String = s.get("desk_gan_epochs", "800".to_string())?;
    cfg.desk_gan_epochs = match desk.as_str() {
        "none" => None,
        n => Some(n.parse().ok().filter(|&e: &usize| e > 0).ok_or_else(|| invalid("desk_gan_epochs", "expected `none` or a positive count"))?),
    };
    cfg.desk_threshold = s.get("desk_threshold", cfg.desk_threshold)?;
    let base_seed: u64 = s.get("seed", 0)?;
    cfg.gan.seed = base_seed;
    cfg.cnn.seed = base_seed;
    let jobs = positive(&mut s, "jobs", 1)?;
    s.finish()?;
    let sweep = SweepConfig {
        subsets,
        seeds: (0..seeds as u64).collect(),
        augmented: if augment { vec![true, false] } else { vec![false] },
    };
    sweep.validate().map_err(|e| invalid("fractions/shots", e))?;

    let ds = load_dataset(&data)?;
    std::fs::create_dir_all(&run.out)?;
    let rows = run_sweep(&ds, &sweep, &cfg, &run.out, jobs)?;
    run.snapshot(&s)?;
    Ok(format!("{} rows written to {}", rows.len(), run.path("sweep.csv").display()))
}

pub fn project(mut s: Settings) -> Outcome {
    let run = Run::new(&mut s, "project")?;
    let data = run.data_dir(&mut s)?;
    let default_gen = run.path("generator.jwgt");
    let default_gen = if default_gen.exists() { default_gen.display().to_string() } else { "none".into() };
    let gpath: String = s.get("generator", default_gen)?;
    let per_class = positive(&mut s, "per_class", 50)?;
    let synth_per_class: usize = s.get("synthetic_per_class", per_class)?;
    let d = TsneConfig::default();
    let cfg = TsneConfig {
        perplexity: s.get("perplexity", d.perplexity)?,
        iterations: positive(&mut s, "iterations", d.iterations)?,
        seed: s.get("seed", d.seed)?,
        ..d
    };
    if !(cfg.perplexity > 1.0) {
        return Err(invalid("perplexity", "must exceed 1"));
    }
    s.finish()?;

    let ds = load_dataset(&data)?;
    let stats = ds.manifest.norm_stats;
    let tpc = ds.manifest.test_per_class;
    let k = per_class.min(tpc);
    let idx: Vec<usize> = (0..NUM_CLASSES).flat_map(|c| c * tpc..c * tpc + k).collect();
    let (x, mut labels) = to_tensor(&ds.test, &idx, &stats);
    let mut rows = x.data().to_vec();
    let mut sources = vec![Source::Real; labels.len()];
    if gpath != "none" && synth_per_class > 0 {
        let g = GeneratorNet::from_weights(&WeightFile::load(Path::new(&gpath))?)?;
        let (sx, sy) = sample_augmentation(&g, &[synth_per_class; NUM_CLASSES], cfg.seed)?;
        rows.extend_from_slice(sx.data());
        sources.extend(std::iter::repeat_n(Source::Synthetic, sy.len()));
        labels.extend(sy);
    }
    let features = Tensor::new(vec![labels.len(), x.dim(1)], rows)?;
    let result = tsne_project(&features, &labels, &sources, &cfg)?;
    let path = run.write("tsne.csv", result.to_csv().as_bytes())?;
    let hollow: Vec<bool> = sources.iter().map(|&s| s == Source::Synthetic).collect();
    let svg = scatter("t-SNE projection", &result.coords, &labels, &hollow, &class_names());
    run.write("tsne.svg", svg.as_bytes())?;
    run.snapshot(&s)?;
    Ok(format!("{} points projected to {}", labels.len(), path.display()))
}

pub fn flops(mut s: Settings) -> Outcome {
    let run = Run::new(&mut s, "flops")?;
    s.finish()?;
    let mut rng = Stream::new(0);
    let g = GeneratorNet::new(DEFAULT_LEAKY_SLOPE, Init::He, &mut rng);
    let d = DiscriminatorNet::new(DEFAULT_LEAKY_SLOPE, 0.0, Init::He, &mut rng);
    let reports = vec![
        count_flops("cnn", &CnnNet::new(0).layer_specs(), 1, jamcgan_core::cnn::INPUT_LEN)?,
        count_flops("generator", &g.0.layer_specs(), jamcgan_core::gan::NOISE_LEN, 1)?,
        count_flops("discriminator", &d.0.layer_specs(), jamcgan_core::gan::SPECTRUM_WIDTH, 1)?,
    ];
    let report = json!({
        "networks": reports,
        "reference": {"flops": REFERENCE_FLOPS, "params": REFERENCE_PARAMS},
    });
    let path = run.write("flops.json", &serde_json::to_vec_pretty(&report).map_err(jamcgan_core::Error::from)?)?;
    run.snapshot(&s)?;
    let summary: Vec<String> = reports
        .iter()
        .map(|r| format!("{} {} FLOPs / {} params", r.network, r.totals.flops, r.totals.params_strict))
        .collect();
    Ok(format!("{}; written to {}", summary.join(", "), path.display()))
}
