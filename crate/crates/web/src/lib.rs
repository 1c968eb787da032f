//! WebAssembly bindings for the browser demo in `www/`.

use jamcgan_core::cnn::{CnnNet, INPUT_LEN};
use jamcgan_core::dsp::{fit_norm, psd, SpectrumVector};
use jamcgan_core::gan::{DiscriminatorNet, GeneratorNet, Init, NOISE_LEN, SPECTRUM_WIDTH};
use jamcgan_core::harness::{count_flops, tsne_project, Source, TsneConfig};
use jamcgan_core::nn::{Tensor, DEFAULT_LEAKY_SLOPE};
use jamcgan_core::rng::Stream;
use jamcgan_core::synth::{synthesize_labeled, JammingClass, SynthConfig};
use jamcgan_core::Result;
use wasm_bindgen::prelude::*;

fn js_err(e: jamcgan_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn spectrum(class_id: usize, jnr_db: f64, index: u64, seed: u64) -> Result<SpectrumVector> {
    let class = JammingClass::from_id(class_id)?;
    psd(&synthesize_labeled(class, jnr_db, index, &SynthConfig::with_seed(seed))?)
}

/// Class names in label order, comma separated.
#[wasm_bindgen]
pub fn class_names() -> String {
    JammingClass::ALL.iter().map(|c| c.name()).collect::<Vec<_>>().join(",")
}

/// The 800-bin dB spectrum of one synthesised capture.
#[wasm_bindgen]
pub fn synthesize_psd(class_id: usize, jnr_db: f64, seed: u64) -> Result<Vec<f64>, JsError> {
    spectrum(class_id, jnr_db, 0, seed).map(|s| s.bins).map_err(js_err)
}

/// Per-layer FLOPs and parameter counts of the classifier and both GAN
/// networks, as JSON.
#[wasm_bindgen]
pub fn flops_report() -> Result<String, JsError> {
    flops_json().map_err(js_err)
}

fn flops_json() -> Result<String> {
    let mut rng = Stream::new(0);
    let g = GeneratorNet::new(DEFAULT_LEAKY_SLOPE, Init::He, &mut rng);
    let d = DiscriminatorNet::new(DEFAULT_LEAKY_SLOPE, 0.0, Init::He, &mut rng);
    let reports = vec![
        count_flops("cnn", &CnnNet::new(0).layer_specs(), 1, INPUT_LEN)?,
        count_flops("generator", &g.0.layer_specs(), NOISE_LEN, 1)?,
        count_flops("discriminator", &d.0.layer_specs(), SPECTRUM_WIDTH, 1)?,
    ];
    Ok(serde_json::to_string(&reports)?)
}

/// t-SNE map of `per_class` spectra of every class at `jnr_db`. Returns
/// flat `(x, y, class)` triples.
#[wasm_bindgen]
pub fn tsne_map(per_class: usize, jnr_db: f64, iterations: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    tsne_triples(per_class, jnr_db, iterations, seed).map_err(js_err)
}

fn tsne_triples(per_class: usize, jnr_db: f64, iterations: usize, seed: u64) -> Result<Vec<f64>> {
    let mut spectra = Vec::new();
    for c in 0..JammingClass::ALL.len() {
        for i in 0..per_class as u64 {
            spectra.push(spectrum(c, jnr_db, i, seed)?);
        }
    }
    let stats = fit_norm(&spectra)?;
    let n = spectra.len();
    let data: Vec<f64> = spectra.iter().flat_map(|s| s.bins.iter().map(|&b| stats.forward(b))).collect();
    let x = Tensor::new(vec![n, INPUT_LEN], data)?;
    let labels: Vec<usize> = spectra.iter().map(|s| s.class_id).collect();
    let cfg = TsneConfig { iterations, seed, ..Default::default() };
    let result = tsne_project(&x, &labels, &vec![Source::Real; n], &cfg)?;
    Ok(result.coords.iter().zip(&labels).flat_map(|(p, &l)| [p[0], p[1], l as f64]).collect())
}
