use std::path::Path;
use std::process::{Command, Output};

use jamcgan_core::dsp::load_spectra;
use jamcgan_core::harness::Dataset;
use jamcgan_core::nn::WeightFile;

fn jamcgan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jamcgan")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = jamcgan(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn generate(dir: &Path, train: usize, test: usize) {
    let d = dir.to_str().unwrap();
    ok(&["generate", "--seed", "7", "--train", &train.to_string(), "--test", &test.to_string(), "--out", d]);
}

fn no_partial_files(dir: &Path) {
    for e in std::fs::read_dir(dir).unwrap() {
        let name = e.unwrap().file_name().to_string_lossy().to_string();
        assert!(!name.ends_with(".partial"), "leftover {name}");
    }
}

#[test]
fn generate_writes_manifest_and_is_repeatable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    generate(a.path(), 3, 2);
    generate(b.path(), 3, 2);
    let ma = std::fs::read(a.path().join("manifest.json")).unwrap();
    assert_eq!(ma, std::fs::read(b.path().join("manifest.json")).unwrap());
    assert_eq!(std::fs::read(a.path().join("train.jspc")).unwrap(), std::fs::read(b.path().join("train.jspc")).unwrap());
    let ds = Dataset::load(a.path()).unwrap();
    assert_eq!(ds.train.len() + ds.test.len(), 8 * 5);
    let snap = std::fs::read_to_string(a.path().join("generate.config")).unwrap();
    assert!(snap.contains("seed = 7\n") && snap.contains("train = 3\n") && snap.contains("classes = all\n"));
    no_partial_files(a.path());
}

#[test]
fn config_errors_exit_2_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = jamcgan(&["generate", "--seed", "1", "--train", "0", "--out", d]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("train"));

    let out = jamcgan(&["generate", "--train", "2", "--out", d]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));

    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "seed = 1\nbogus = 3\n").unwrap();
    let out = jamcgan(&["generate", "--config", cfg.to_str().unwrap(), "--out", d]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    let out = jamcgan(&["train-gan", "--seed", "1", "--shots", "2", "--fraction", "0.5", "--out", d]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn missing_inputs_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = jamcgan(&["train-cnn", "--seed", "1", "--no-augment", "--out", d]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small\nseed = 1\ntrain = 5\ntest = 1\n").unwrap();
    ok(&["generate", "--config", cfg.to_str().unwrap(), "--train", "2", "--out", d]);
    let ds = Dataset::load(dir.path()).unwrap();
    assert_eq!(ds.manifest.train_per_class, 2);
    assert_eq!(ds.manifest.global_seed, 1);
}

#[test]
fn gan_then_augment_gives_four_times_the_shots() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    generate(dir.path(), 10, 1);
    let msg = ok(&["train-gan", "--seed", "3", "--shots", "10", "--epochs", "2", "--out", d]);
    assert!(msg.contains("generator"));
    let trace = std::fs::read_to_string(dir.path().join("gan_loss.csv")).unwrap();
    assert!(trace.starts_with("step,l_d,l_g\n"));
    // 80 samples in batches of at most 128: one step per epoch
    assert_eq!(trace.lines().count(), 1 + 2);
    let wf = WeightFile::load(&dir.path().join("generator.jwgt")).unwrap();
    assert_eq!(wf.meta["per_class"], 10);

    ok(&["augment", "--seed", "3", "--out", d]);
    let (_, synth) = load_spectra(&dir.path().join("synthetic.jspc")).unwrap();
    assert_eq!(synth.len(), 8 * 40);
    for c in 0..8 {
        assert_eq!(synth.iter().filter(|s| s.class_id == c).count(), 40);
    }
    assert!(synth.iter().all(|s| s.jnr_db.is_none() && s.bins.len() == 800));

    let msg = ok(&["train-cnn", "--seed", "3", "--shots", "10", "--epochs", "1", "--out", d]);
    assert!(msg.contains("80 real + 320 synthetic"), "{msg}");
    no_partial_files(dir.path());
}

#[test]
fn no_augment_skips_the_generator() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    generate(dir.path(), 3, 1);
    ok(&["train-gan", "--seed", "3", "--no-augment", "--out", d]);
    assert!(!dir.path().join("generator.jwgt").exists());
    assert!(std::fs::read_to_string(dir.path().join("train-gan.config")).unwrap().contains("augment = false"));
    ok(&["train-cnn", "--seed", "3", "--no-augment", "--epochs", "1", "--out", d]);
    assert!(dir.path().join("cnn.jwgt").exists());
    assert!(!dir.path().join("generator.jwgt").exists());
}

#[test]
fn overfit_probe_evaluates_to_perfect_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    generate(dir.path(), 2, 1);
    ok(&["train-cnn", "--seed", "0", "--shots", "1", "--no-augment", "--epochs", "200", "--out", d]);
    let msg = ok(&["evaluate", "--split", "train", "--shots", "1", "--out", d]);
    assert_eq!(msg.trim(), "accuracy 1.000");
    let csv = std::fs::read_to_string(dir.path().join("confusion.csv")).unwrap();
    let diagonal: Vec<String> = csv.lines().enumerate().map(|(i, l)| l.split(',').nth(i).unwrap().to_string()).collect();
    assert_eq!(diagonal, vec!["1"; 8]);
    assert!(dir.path().join("confusion.svg").exists());
}

#[test]
fn evaluate_on_test_split_with_jnr_filter() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    generate(dir.path(), 2, 4);
    ok(&["train-cnn", "--seed", "0", "--no-augment", "--epochs", "1", "--out", d]);
    let ds = Dataset::load(dir.path()).unwrap();
    let j = ds.test[0].jnr_db.unwrap();
    ok(&["evaluate", "--jnr", &j.to_string(), "--out", d]);
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("evaluation.json")).unwrap()).unwrap();
    assert_eq!(report["samples"], ds.test_indices(Some(&[j])).len());
    let out = jamcgan(&["evaluate", "--jnr", "99", "--out", d]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn preprocess_matches_generated_spectra() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    ok(&["generate", "--seed", "5", "--train", "2", "--test", "1", "--set", "iq_per_class=1", "--out", d]);
    let names = ["CWJ_A", "CWJ_W", "AMJ", "NAMJ", "NBNJ", "MTJ", "LFMJ", "PPNJ"];
    let inputs: Vec<String> = names.iter().map(|n| dir.path().join(format!("iq/{n}_0.jsiq")).display().to_string()).collect();
    let pdir = dir.path().join("pre");
    ok(&["preprocess", "--input", &inputs.join(","), "--out", pdir.to_str().unwrap()]);
    let (_, spectra) = load_spectra(&pdir.join("spectra.jspc")).unwrap();
    let ds = Dataset::load(dir.path()).unwrap();
    for (c, s) in spectra.iter().enumerate() {
        let reference = &ds.train[c * 2];
        assert_eq!(s.class_id, c);
        // captures are stored as f32, so the spectra agree to float precision only
        for (a, b) in s.bins.iter().zip(&reference.bins) {
            assert!((a - b).abs() < 1e-3, "class {c}: {a} vs {b}");
        }
    }
}

#[test]
fn flops_totals_are_layer_sums() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["flops", "--out", dir.path().to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("flops.json")).unwrap()).unwrap();
    let nets = v["networks"].as_array().unwrap();
    assert_eq!(nets.len(), 3);
    for n in nets {
        for key in ["flops", "params_strict", "params_formula"] {
            let sum: u64 = n["layers"].as_array().unwrap().iter().map(|l| l[key].as_u64().unwrap()).sum();
            assert_eq!(n["totals"][key].as_u64().unwrap(), sum, "{} {key}", n["network"]);
        }
    }
    assert_eq!(v["reference"]["params"], 4.97e6);
}

#[test]
fn sweep_rows_cover_subsets_jnrs_and_ablation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    generate(dir.path(), 10, 12);
    let ds = Dataset::load(dir.path()).unwrap();
    assert_eq!(ds.test.iter().filter_map(|s| s.jnr_db).fold(0u16, |m, j| m | 1 << ((j + 20.0) / 5.0) as u16), 0x1ff);
    let args = [
        "sweep", "--fractions", "1.0,0.1", "--seeds", "1", "--set", "gan_epochs=1", "--set", "desk_gan_epochs=none",
        "--set", "cnn_epochs=1", "--out", d,
    ];
    ok(&args);
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 36);
    assert!(csv.starts_with("subset,jnr_db,seed,augmented,accuracy\n"));
    assert!(dir.path().join("accuracy_frac0.1.svg").exists());
    assert!(dir.path().join("generator_frac0.1_aug_s0.jwgt").exists());
    assert!(!dir.path().join("generator_frac0.1_noaug_s0.jwgt").exists());

    ok(&args);
    assert_eq!(std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap(), csv);
}

#[test]
fn project_writes_real_and_synthetic_points() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    generate(dir.path(), 2, 3);
    ok(&["train-gan", "--seed", "1", "--epochs", "1", "--out", d]);
    ok(&["project", "--set", "per_class=3", "--set", "synthetic_per_class=2", "--set", "iterations=50", "--out", d]);
    let csv = std::fs::read_to_string(dir.path().join("tsne.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 8 * 3 + 8 * 2);
    assert_eq!(rows.iter().filter(|r| r.ends_with(",synthetic")).count(), 16);
    assert!(dir.path().join("tsne.svg").exists());
}
