use serde::{Deserialize, Serialize};

use super::fft::fft_in_place;
use crate::error::{Error, Result};
use crate::synth::IqCapture;

/// Length of a spectrum vector.
pub const SPECTRUM_LEN: usize = 800;
/// FFT bins averaged into one spectrum bin.
pub const GROUP_SIZE: usize = 81;
/// Capture length expected by [`psd`].
pub const PSD_FFT_LEN: usize = 65536;
/// Floor applied before taking the logarithm.
pub const LOG_FLOOR: f64 = 1e-30;

/// A log-power spectrum in dB (or in the normalised domain after
/// [`super::normalize`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumVector {
    pub bins: Vec<f64>,
    pub class_id: usize,
    /// `None` for generator output.
    pub jnr_db: Option<f64>,
}

impl SpectrumVector {
    pub fn argmax(&self) -> usize {
        argmax(&self.bins)
    }
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Spectrum bin that holds FFT bin `fft_bin`, if it is retained.
pub fn group_of_fft_bin(fft_bin: usize) -> Option<usize> {
    let g = fft_bin / GROUP_SIZE;
    (g < SPECTRUM_LEN).then_some(g)
}

/// Spectrum bin holding frequency `f` (Hz, may be negative) at rate `fs`.
pub fn group_of_frequency(f: f64, fs: f64) -> Option<usize> {
    let n = PSD_FFT_LEN as f64;
    let bin = (f / fs * n).round().rem_euclid(n) as usize;
    group_of_fft_bin(bin)
}

/// Power spectrum of a capture, grouped into 800 power-mean bins of 81 FFT
/// bins each and expressed in dB.
pub fn psd(capture: &IqCapture) -> Result<SpectrumVector> {
    if capture.len() != PSD_FFT_LEN || capture.q.len() != PSD_FFT_LEN {
        return Err(Error::param(format!(
            "PSD expects {PSD_FFT_LEN} samples, got {}",
            capture.len()
        )));
    }
    let mut buf = capture.to_complex();
    fft_in_place(&mut buf)?;
    let bins = buf[..SPECTRUM_LEN * GROUP_SIZE]
        .chunks_exact(GROUP_SIZE)
        .map(|group| {
            let mean = group.iter().map(|v| v.norm_sqr()).sum::<f64>() / GROUP_SIZE as f64;
            10.0 * mean.max(LOG_FLOOR).log10()
        })
        .collect();
    Ok(SpectrumVector {
        bins,
        class_id: capture.class_id,
        jnr_db: capture.jnr_db,
    })
}
