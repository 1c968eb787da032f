use serde::{Deserialize, Serialize};

use super::psd::SpectrumVector;
use crate::error::{Error, Result};

/// Clamp applied to normalised values that fall outside the training range.
pub const NORM_CLAMP: f64 = 1.5;

/// Global dB range of a training split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub x_min: f64,
    pub x_max: f64,
}

impl NormStats {
    pub fn new(x_min: f64, x_max: f64) -> Result<Self> {
        if !(x_min < x_max) {
            return Err(Error::param(format!("degenerate range [{x_min}, {x_max}]")));
        }
        Ok(NormStats { x_min, x_max })
    }

    #[inline]
    pub fn forward(&self, v: f64) -> f64 {
        let y = 2.0 * (v - self.x_min) / (self.x_max - self.x_min) - 1.0;
        y.clamp(-NORM_CLAMP, NORM_CLAMP)
    }

    #[inline]
    pub fn inverse(&self, y: f64) -> f64 {
        (y + 1.0) / 2.0 * (self.x_max - self.x_min) + self.x_min
    }
}

/// Global min and max over every bin of every training spectrum.
pub fn fit_norm<'a, I>(train: I) -> Result<NormStats>
where
    I: IntoIterator<Item = &'a SpectrumVector>,
{
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut seen = false;
    for s in train {
        seen = true;
        for &b in &s.bins {
            lo = lo.min(b);
            hi = hi.max(b);
        }
    }
    if !seen {
        return Err(Error::param("cannot fit normalisation on an empty collection"));
    }
    NormStats::new(lo, hi)
}

pub fn normalize(spectrum: &SpectrumVector, stats: &NormStats) -> SpectrumVector {
    SpectrumVector {
        bins: spectrum.bins.iter().map(|&b| stats.forward(b)).collect(),
        ..spectrum.clone()
    }
}

pub fn denormalize(spectrum: &SpectrumVector, stats: &NormStats) -> SpectrumVector {
    SpectrumVector {
        bins: spectrum.bins.iter().map(|&b| stats.inverse(b)).collect(),
        ..spectrum.clone()
    }
}
