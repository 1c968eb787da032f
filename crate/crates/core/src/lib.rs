//! Few-shot jamming-signal recognition.
//!
//! The crate synthesises eight families of jamming waveforms, turns each
//! capture into an 800-bin log power spectrum, augments small training sets
//! with a label-conditioned GAN, and classifies spectra with a 1-D CNN. The
//! [`harness`] module drives the end-to-end experiments and their reports.

pub mod cnn;
pub mod dsp;
pub mod error;
pub mod gan;
pub mod harness;
pub mod io;
pub mod nn;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
