//! Spectral preprocessing: FFT, 800-bin log-PSD, and dataset normalisation.

pub mod fft;
pub mod norm;
pub mod psd;
pub mod spcfile;

pub use fft::{fft, ifft};
pub use norm::{denormalize, fit_norm, normalize, NormStats};
pub use spcfile::{load_spectra, read_spectra, save_spectra, write_spectra, SpectrumFileHeader};
pub use psd::{argmax, psd, SpectrumVector, GROUP_SIZE, PSD_FFT_LEN, SPECTRUM_LEN};
