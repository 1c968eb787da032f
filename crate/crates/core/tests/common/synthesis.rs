//! Invariant checks over many seeded draws per class.

use std::f64::consts::{PI, TAU};

use jamcgan_core::dsp::psd::group_of_frequency;
use jamcgan_core::dsp::{argmax, psd};
use jamcgan_core::synth::{
    draw_params_for, scale_to_jnr, synthesize_waveform, IqCapture, JammingClass, JammingParams, SynthConfig,
};

pub type Check = Result<(), String>;

fn waveform(class: JammingClass, seed: u64, cfg: &SynthConfig) -> (JammingParams, IqCapture) {
    let p = draw_params_for(class, seed, cfg);
    let cap = synthesize_waveform(&p, cfg).unwrap();
    (p, cap)
}

pub fn constant_envelope(seeds: u64) -> Check {
    let cfg = SynthConfig::default();
    for seed in 0..seeds {
        for class in [JammingClass::CwjA, JammingClass::CwjW] {
            let (p, cap) = waveform(class, seed, &cfg);
            let amp = match p {
                JammingParams::CwjA { amp_sqrt_pj, .. } | JammingParams::CwjW { amp_sqrt_pj, .. } => amp_sqrt_pj,
                _ => unreachable!(),
            };
            for (k, (i, q)) in cap.i.iter().zip(&cap.q).enumerate() {
                let dev = ((i * i + q * q).sqrt() - amp).abs() / amp;
                if dev >= 1e-12 {
                    return Err(format!("{class:?} seed {seed} sample {k}: relative deviation {dev:e}"));
                }
            }
        }
        // a one-tone multitone draw is a continuous wave too
        let (p, _) = waveform(JammingClass::Mtj, seed, &cfg);
        if let JammingParams::Mtj { p_t, f_t, theta, .. } = p {
            let one = JammingParams::Mtj { n_t: 1, p_t: vec![p_t[0]], f_t: vec![f_t[0]], theta: vec![theta[0]] };
            let cap = synthesize_waveform(&one, &cfg).unwrap();
            let amp = p_t[0].sqrt();
            if cap.i.iter().zip(&cap.q).any(|(i, q)| ((i * i + q * q).sqrt() - amp).abs() / amp >= 1e-12) {
                return Err(format!("one-tone MTJ seed {seed} envelope varies"));
            }
        }
    }
    Ok(())
}

/// Argmax of the noise-free spectrum against the spectrum bin of the tone
/// (or of any tone, for multitone draws).
pub fn peak_placement(seeds: u64) -> Check {
    let cfg = SynthConfig::default();
    for seed in 0..seeds {
        for class in [JammingClass::CwjA, JammingClass::CwjW, JammingClass::Amj, JammingClass::Mtj] {
            let (p, cap) = waveform(class, seed, &cfg);
            let freqs: Vec<f64> = match &p {
                JammingParams::CwjA { f_j, .. } | JammingParams::CwjW { f_j, .. } | JammingParams::Amj { f_j, .. } => {
                    vec![*f_j]
                }
                JammingParams::Mtj { f_t, .. } => f_t.clone(),
                _ => unreachable!(),
            };
            let peak = argmax(&psd(&cap).unwrap().bins) as i64;
            let near = freqs.iter().any(|&f| {
                let g = group_of_frequency(f, cfg.fs).expect("class tones lie in the kept band") as i64;
                (peak - g).abs() <= 2
            });
            if !near {
                return Err(format!("{class:?} seed {seed}: peak at bin {peak}, tones {freqs:?}"));
            }
        }
    }
    Ok(())
}

pub fn ppnj_gating(seeds: u64) -> Check {
    let cfg = SynthConfig::default();
    for seed in 0..seeds {
        let (p, cap) = waveform(JammingClass::Ppnj, seed, &cfg);
        let JammingParams::Ppnj { period_t, tau, .. } = p else { unreachable!() };
        let mut on = 0usize;
        for k in 0..cap.len() {
            let gated = k % period_t >= tau;
            let zero = cap.i[k] == 0.0 && cap.q[k] == 0.0;
            if gated && !zero {
                return Err(format!("seed {seed}: sample {k} should be gated (T {period_t}, tau {tau})"));
            }
            on += usize::from(!zero);
        }
        if on == 0 {
            return Err(format!("seed {seed}: capture is entirely gated"));
        }
    }
    Ok(())
}

/// Instantaneous frequency from wrapped phase differences against the
/// analytic line `f_L + W_sw·t/T_sw`, evaluated at mid-sample times.
pub fn lfmj_ramp(seeds: u64) -> Check {
    let cfg = SynthConfig::default();
    for seed in 0..seeds {
        let (p, cap) = waveform(JammingClass::Lfmj, seed, &cfg);
        let JammingParams::Lfmj { f_l, f_h, t_sw, .. } = p else { unreachable!() };
        let w = f_h - f_l;
        let mut worst: f64 = 0.0;
        for k in 0..cap.len() - 1 {
            let a = cap.q[k].atan2(cap.i[k]);
            let b = cap.q[k + 1].atan2(cap.i[k + 1]);
            let d = (b - a + PI).rem_euclid(TAU) - PI;
            let f_est = d * cfg.fs / TAU;
            let t_mid = (k as f64 + 0.5) / cfg.fs;
            worst = worst.max((f_est - (f_l + w * t_mid / t_sw)).abs());
        }
        if worst >= 0.01 * w {
            return Err(format!("seed {seed}: ramp deviates {worst:.1} Hz, sweep {w:.1} Hz"));
        }
    }
    Ok(())
}

pub fn jnr_calibration(seeds: u64) -> Check {
    let cfg = SynthConfig::default();
    for seed in 0..seeds {
        for class in JammingClass::ALL {
            let (_, cap) = waveform(class, seed, &cfg);
            for jnr in [-20.0, -7.5, 0.0, 12.0, 20.0] {
                let scaled = scale_to_jnr(&cap, jnr, cfg.noise_power).unwrap();
                let measured = 10.0 * (scaled.mean_power() / cfg.noise_power).log10();
                if (measured - jnr).abs() >= 1e-9 {
                    return Err(format!("{class:?} seed {seed}: measured {measured} dB for target {jnr} dB"));
                }
            }
        }
    }
    Ok(())
}

pub fn parameter_ranges(seeds: u64) -> Check {
    let cfg = SynthConfig::default();
    for seed in 0..seeds {
        for class in JammingClass::ALL {
            draw_params_for(class, seed, &cfg).validate().map_err(|e| format!("{class:?} seed {seed}: {e}"))?;
        }
    }
    Ok(())
}

pub fn suite(seeds: u64) -> Vec<(&'static str, Check)> {
    vec![
        ("constant envelope", constant_envelope(seeds)),
        ("spectral peak placement", peak_placement(seeds)),
        ("PPNJ zero gating", ppnj_gating(seeds)),
        ("LFMJ ramp", lfmj_ramp(seeds)),
        ("JNR calibration", jnr_calibration(seeds)),
        ("parameter ranges", parameter_ranges(seeds)),
    ]
}
