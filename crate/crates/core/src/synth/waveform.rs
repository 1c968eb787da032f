use std::f64::consts::TAU;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::params::{JammingParams, SynthConfig};
use crate::dsp::fft::{fft_in_place, ifft_in_place};
use crate::error::{Error, Result};
use crate::rng::Stream;

/// A complex baseband capture stored as separate in-phase and quadrature rails.
#[derive(Debug, Clone, PartialEq)]
pub struct IqCapture {
    pub i: Vec<f64>,
    pub q: Vec<f64>,
    pub fs: f64,
    pub class_id: usize,
    /// `None` for a noise-free waveform.
    pub jnr_db: Option<f64>,
    pub sample_seed: u64,
}

/// Metadata carried alongside the samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureHeader {
    pub fs: f64,
    pub n_raw: usize,
    pub class_id: usize,
    pub jnr_db: Option<f64>,
    pub sample_seed: u64,
}

impl IqCapture {
    pub fn from_complex(samples: &[Complex64], fs: f64, class_id: usize) -> Self {
        IqCapture {
            i: samples.iter().map(|c| c.re).collect(),
            q: samples.iter().map(|c| c.im).collect(),
            fs,
            class_id,
            jnr_db: None,
            sample_seed: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i.is_empty()
    }

    pub fn sample(&self, k: usize) -> Complex64 {
        Complex64::new(self.i[k], self.q[k])
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.i
            .iter()
            .zip(&self.q)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect()
    }

    pub fn mean_power(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let sum: f64 = self.i.iter().zip(&self.q).map(|(a, b)| a * a + b * b).sum();
        sum / self.len() as f64
    }

    pub fn header(&self) -> CaptureHeader {
        CaptureHeader {
            fs: self.fs,
            n_raw: self.len(),
            class_id: self.class_id,
            jnr_db: self.jnr_db,
            sample_seed: self.sample_seed,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.i.iter().chain(&self.q).all(|v| v.is_finite())
    }
}

/// `amp·exp(j(2πf·k/fs + θ))`, shared by every tone-based class.
#[inline]
fn tone(amp: f64, f: f64, theta: f64, k: usize, fs: f64) -> Complex64 {
    let t = k as f64 / fs;
    let (s, c) = (TAU * f * t + theta).sin_cos();
    Complex64::new(amp * c, amp * s)
}

/// Zero-mean complex Gaussian noise, flat over `|f| ≤ rbw·fs/2` and zero
/// outside, normalised to unit mean power.
pub fn band_limited_noise(rbw: f64, n: usize, fs: f64, seed: u64) -> Result<Vec<Complex64>> {
    if !(rbw > 0.0 && rbw <= 1.0) {
        return Err(Error::param(format!("relative bandwidth {rbw} outside (0, 1]")));
    }
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::param(format!("noise length {n} is not a power of two")));
    }
    if !(fs > 0.0) {
        return Err(Error::param("sample rate must be positive"));
    }
    let mut rng = Stream::new(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut buf: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gaussian() * scale, rng.gaussian() * scale))
        .collect();

    if rbw < 1.0 {
        fft_in_place(&mut buf)?;
        // bin m sits at m·fs/n for m < n/2 and (m − n)·fs/n above
        let cutoff = rbw * n as f64 / 2.0;
        for (m, v) in buf.iter_mut().enumerate() {
            let signed = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
            if signed.abs() > cutoff {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        ifft_in_place(&mut buf)?;
    }

    let mean = buf.iter().sum::<Complex64>() / n as f64;
    for v in buf.iter_mut() {
        *v -= mean;
    }
    let power = buf.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
    if power <= 0.0 {
        return Err(Error::Degenerate("band-limited noise has zero power".into()));
    }
    let g = power.sqrt().recip();
    for v in buf.iter_mut() {
        *v *= g;
    }
    Ok(buf)
}

/// Noise-free complex baseband waveform of one jamming draw.
pub fn synthesize_waveform(params: &JammingParams, cfg: &SynthConfig) -> Result<IqCapture> {
    let n = cfg.n_raw;
    if n == 0 {
        return Err(Error::param("n_raw must be positive"));
    }
    let fs = cfg.fs;
    let samples: Vec<Complex64> = match params {
        JammingParams::CwjA {
            amp_sqrt_pj,
            f_j,
            theta_j,
        }
        | JammingParams::CwjW {
            amp_sqrt_pj,
            f_j,
            theta_j,
        } => (0..n).map(|k| tone(*amp_sqrt_pj, *f_j, *theta_j, k, fs)).collect(),

        JammingParams::Amj {
            u0,
            f_m,
            theta_m,
            beta_am,
            f_j,
            theta_j,
            p_j,
        } => {
            let norm = (p_j / (u0 + beta_am * beta_am)).sqrt();
            (0..n)
                .map(|k| {
                    let t = k as f64 / fs;
                    let m = beta_am * (TAU * f_m * t + theta_m).cos();
                    tone(norm * (u0 + m), *f_j, *theta_j, k, fs)
                })
                .collect()
        }

        JammingParams::Namj {
            u0,
            rbw,
            f_j,
            theta_j,
            noise_seed,
        } => {
            let un = band_limited_noise(*rbw, n, fs, *noise_seed)?;
            un.iter()
                .enumerate()
                .map(|(k, &u)| (u + u0) * tone(1.0, *f_j, *theta_j, k, fs))
                .collect()
        }

        JammingParams::Nbnj {
            rbw,
            f_j,
            theta_j,
            noise_seed,
        } => {
            let un = band_limited_noise(*rbw, n, fs, *noise_seed)?;
            un.iter()
                .enumerate()
                .map(|(k, &u)| u * tone(1.0, *f_j, *theta_j, k, fs))
                .collect()
        }

        JammingParams::Mtj {
            n_t,
            p_t,
            f_t,
            theta,
        } => {
            if *n_t == 0 || p_t.is_empty() || f_t.is_empty() || theta.is_empty() {
                return Err(Error::param("multitone jamming needs at least one tone"));
            }
            if p_t.len() != *n_t || f_t.len() != *n_t || theta.len() != *n_t {
                return Err(Error::param("multitone arrays disagree with n_t"));
            }
            (0..n)
                .map(|k| {
                    let mut acc = tone(p_t[0].sqrt(), f_t[0], theta[0], k, fs);
                    for i in 1..*n_t {
                        acc += tone(p_t[i].sqrt(), f_t[i], theta[i], k, fs);
                    }
                    acc
                })
                .collect()
        }

        JammingParams::Lfmj {
            f_l,
            f_h,
            t_sw,
            theta_j,
            p_j,
        } => {
            let rate = (f_h - f_l) / (2.0 * t_sw);
            let amp = p_j.sqrt();
            (0..n)
                .map(|k| {
                    let t = k as f64 / fs;
                    let (s, c) = (TAU * (f_l + rate * t) * t + theta_j).sin_cos();
                    Complex64::new(amp * c, amp * s)
                })
                .collect()
        }

        JammingParams::Ppnj {
            period_t,
            tau,
            rbw,
            f_j,
            theta_j,
            noise_seed,
        } => {
            if *tau == 0 || tau >= period_t {
                return Err(Error::param("pulse width must satisfy 0 < tau < period"));
            }
            let un = band_limited_noise(*rbw, n, fs, *noise_seed)?;
            un.iter()
                .enumerate()
                .map(|(k, &u)| {
                    if k % period_t < *tau {
                        u * tone(1.0, *f_j, *theta_j, k, fs)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect()
        }
    };
    Ok(IqCapture::from_complex(&samples, fs, params.class().id()))
}
