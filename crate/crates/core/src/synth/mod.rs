//! Jamming waveform synthesis with calibrated jamming-to-noise ratio.

pub mod class;
pub mod iqfile;
pub mod jnr;
pub mod params;
pub mod waveform;

pub use class::{JammingClass, NUM_CLASSES};
pub use jnr::{apply_jnr, sample_seed, scale_to_jnr, synthesize_labeled};
pub use params::{draw_params, draw_params_for, JammingParams, SynthConfig};
pub use waveform::{band_limited_noise, synthesize_waveform, IqCapture};
