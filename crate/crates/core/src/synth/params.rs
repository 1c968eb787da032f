use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::class::JammingClass;
use crate::error::{Error, Result};
use crate::rng::{mix, Stream};

const MHZ: f64 = 1.0e6;

/// Centre frequency used by every class without its own frequency row.
pub const COMMON_F_J: f64 = 25.0 * MHZ;

/// Highest frequency any class can place energy at.
pub const MAX_CLASS_FREQ: f64 = 30.0 * MHZ;

/// Sampling setup shared by every capture of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub fs: f64,
    pub n_raw: usize,
    pub noise_power: f64,
    pub global_seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            fs: 163.84e6,
            n_raw: 65536,
            noise_power: 1.0,
            global_seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn with_seed(global_seed: u64) -> Self {
        SynthConfig {
            global_seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_raw == 0 || !self.n_raw.is_power_of_two() {
            return Err(Error::param(format!(
                "n_raw must be a non-zero power of two, got {}",
                self.n_raw
            )));
        }
        if !(self.fs > 2.0 * MAX_CLASS_FREQ) {
            return Err(Error::param(format!(
                "fs = {} Hz does not cover the 30 MHz class band",
                self.fs
            )));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(Error::param("noise_power must be positive"));
        }
        Ok(())
    }

    /// Capture duration in seconds.
    pub fn duration(&self) -> f64 {
        self.n_raw as f64 / self.fs
    }
}

/// Per-class waveform parameters. Noise-driven classes carry the seed of
/// their band-limited noise so the waveform is a pure function of the params.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class")]
pub enum JammingParams {
    CwjA {
        amp_sqrt_pj: f64,
        f_j: f64,
        theta_j: f64,
    },
    CwjW {
        amp_sqrt_pj: f64,
        f_j: f64,
        theta_j: f64,
    },
    Amj {
        u0: f64,
        f_m: f64,
        theta_m: f64,
        beta_am: f64,
        f_j: f64,
        theta_j: f64,
        p_j: f64,
    },
    Namj {
        u0: f64,
        rbw: f64,
        f_j: f64,
        theta_j: f64,
        noise_seed: u64,
    },
    Nbnj {
        rbw: f64,
        f_j: f64,
        theta_j: f64,
        noise_seed: u64,
    },
    Mtj {
        n_t: usize,
        p_t: Vec<f64>,
        f_t: Vec<f64>,
        theta: Vec<f64>,
    },
    Lfmj {
        f_l: f64,
        f_h: f64,
        t_sw: f64,
        theta_j: f64,
        p_j: f64,
    },
    Ppnj {
        period_t: usize,
        tau: usize,
        rbw: f64,
        f_j: f64,
        theta_j: f64,
        noise_seed: u64,
    },
}

impl JammingParams {
    pub fn class(&self) -> JammingClass {
        match self {
            JammingParams::CwjA { .. } => JammingClass::CwjA,
            JammingParams::CwjW { .. } => JammingClass::CwjW,
            JammingParams::Amj { .. } => JammingClass::Amj,
            JammingParams::Namj { .. } => JammingClass::Namj,
            JammingParams::Nbnj { .. } => JammingClass::Nbnj,
            JammingParams::Mtj { .. } => JammingClass::Mtj,
            JammingParams::Lfmj { .. } => JammingClass::Lfmj,
            JammingParams::Ppnj { .. } => JammingClass::Ppnj,
        }
    }

    /// Sweep bandwidth of an LFMJ draw.
    pub fn sweep_bandwidth(&self) -> Option<f64> {
        match self {
            JammingParams::Lfmj { f_l, f_h, .. } => Some(f_h - f_l),
            _ => None,
        }
    }

    /// Checks the structural invariants and the sampling ranges of the class.
    pub fn validate(&self) -> Result<()> {
        let phase_ok = |p: f64| (0.0..TAU).contains(&p);
        let within = |v: f64, lo: f64, hi: f64| v >= lo && v <= hi;
        let ok = match self {
            JammingParams::CwjA {
                amp_sqrt_pj,
                f_j,
                theta_j,
            } => within(*amp_sqrt_pj, 0.1, 50.0) && *f_j == 20.0 * MHZ && phase_ok(*theta_j),
            JammingParams::CwjW {
                amp_sqrt_pj,
                f_j,
                theta_j,
            } => *amp_sqrt_pj == 20.0 && within(*f_j, 20.0 * MHZ, 30.0 * MHZ) && phase_ok(*theta_j),
            JammingParams::Amj {
                u0,
                f_m,
                theta_m,
                beta_am,
                f_j,
                theta_j,
                p_j,
            } => {
                within(*u0, 10.0, 110.0)
                    && within(*f_m, 22.0 * MHZ, 28.0 * MHZ)
                    && *beta_am == 1.0
                    && *f_j == COMMON_F_J
                    && phase_ok(*theta_m)
                    && phase_ok(*theta_j)
                    && *p_j > 0.0
            }
            JammingParams::Namj {
                u0,
                rbw,
                f_j,
                theta_j,
                ..
            } => within(*u0, 2.0, 50.0) && *rbw == 0.3 && *f_j == COMMON_F_J && phase_ok(*theta_j),
            JammingParams::Nbnj {
                rbw, f_j, theta_j, ..
            } => within(*rbw, 0.02, 1.0) && *f_j == COMMON_F_J && phase_ok(*theta_j),
            JammingParams::Mtj {
                n_t,
                p_t,
                f_t,
                theta,
            } => {
                *n_t >= 1
                    && p_t.len() == *n_t
                    && f_t.len() == *n_t
                    && theta.len() == *n_t
                    && p_t.iter().all(|&p| p > 0.0)
                    && f_t.iter().all(|&f| within(f, 22.0 * MHZ, 28.0 * MHZ))
                    && theta.iter().all(|&p| phase_ok(p))
            }
            JammingParams::Lfmj {
                f_l,
                f_h,
                t_sw,
                theta_j,
                p_j,
            } => {
                within(*f_h, 2.024 * MHZ, 3.0 * MHZ)
                    && within(*f_l, -2.0 * MHZ, 0.0)
                    && f_h > f_l
                    && *t_sw > 0.0
                    && phase_ok(*theta_j)
                    && *p_j > 0.0
            }
            JammingParams::Ppnj {
                period_t,
                tau,
                rbw,
                f_j,
                theta_j,
                ..
            } => {
                (8000..=18000).contains(period_t)
                    && (2000..=3000).contains(tau)
                    && tau < period_t
                    && *rbw == 0.2
                    && *f_j == COMMON_F_J
                    && phase_ok(*theta_j)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("parameters out of range: {self:?}")))
        }
    }
}

/// Draws parameters for `class` with the sweep period of the default capture.
pub fn draw_params(class: JammingClass, seed: u64) -> JammingParams {
    draw_params_for(class, seed, &SynthConfig::default())
}

/// Draws parameters for `class`; the LFMJ sweep period spans one capture of `cfg`.
pub fn draw_params_for(class: JammingClass, seed: u64, cfg: &SynthConfig) -> JammingParams {
    let mut rng = Stream::new(mix(&[seed, class.id() as u64, 0x5041_5241]));
    match class {
        JammingClass::CwjA => JammingParams::CwjA {
            amp_sqrt_pj: rng.uniform_in(0.1, 50.0),
            f_j: 20.0 * MHZ,
            theta_j: rng.phase(),
        },
        JammingClass::CwjW => JammingParams::CwjW {
            amp_sqrt_pj: 20.0,
            f_j: rng.uniform_in(20.0 * MHZ, 30.0 * MHZ),
            theta_j: rng.phase(),
        },
        JammingClass::Amj => JammingParams::Amj {
            u0: rng.uniform_in(10.0, 110.0),
            f_m: rng.uniform_in(22.0 * MHZ, 28.0 * MHZ),
            theta_m: rng.phase(),
            beta_am: 1.0,
            f_j: COMMON_F_J,
            theta_j: rng.phase(),
            p_j: 1.0,
        },
        JammingClass::Namj => JammingParams::Namj {
            u0: rng.uniform_in(2.0, 50.0),
            rbw: 0.3,
            f_j: COMMON_F_J,
            theta_j: rng.phase(),
            noise_seed: rng.next_u64(),
        },
        JammingClass::Nbnj => JammingParams::Nbnj {
            rbw: rng.uniform_in(0.02, 1.0),
            f_j: COMMON_F_J,
            theta_j: rng.phase(),
            noise_seed: rng.next_u64(),
        },
        JammingClass::Mtj => {
            let n_t = rng.int_in(2, 6) as usize;
            let f_t = (0..n_t).map(|_| rng.uniform_in(22.0 * MHZ, 28.0 * MHZ)).collect();
            let theta = (0..n_t).map(|_| rng.phase()).collect();
            JammingParams::Mtj {
                n_t,
                p_t: vec![1.0; n_t],
                f_t,
                theta,
            }
        }
        JammingClass::Lfmj => JammingParams::Lfmj {
            f_h: rng.uniform_in(2.024 * MHZ, 3.0 * MHZ),
            f_l: rng.uniform_in(-2.0 * MHZ, 0.0),
            t_sw: cfg.duration(),
            theta_j: rng.phase(),
            p_j: 1.0,
        },
        JammingClass::Ppnj => JammingParams::Ppnj {
            period_t: rng.int_in(8000, 18000) as usize,
            tau: rng.int_in(2000, 3000) as usize,
            rbw: 0.2,
            f_j: COMMON_F_J,
            theta_j: rng.phase(),
            noise_seed: rng.next_u64(),
        },
    }
}
