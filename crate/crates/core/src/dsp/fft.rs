//! Radix-2 transforms backed by `rustfft`, with planner caching per thread.

use std::cell::RefCell;

use rustfft::num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::param(format!("FFT length {n} is not a power of two")));
    }
    Ok(())
}

fn process(buf: &mut [Complex64], direction: FftDirection) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft(buf.len(), direction));
    plan.process(buf);
}

/// Unnormalised forward DFT, `X[m] = Σ x[k]·exp(−j2πmk/n)`, in place.
pub fn fft_in_place(buf: &mut [Complex64]) -> Result<()> {
    check_len(buf.len())?;
    process(buf, FftDirection::Forward);
    Ok(())
}

/// Inverse DFT scaled by `1/n`, in place.
pub fn ifft_in_place(buf: &mut [Complex64]) -> Result<()> {
    check_len(buf.len())?;
    process(buf, FftDirection::Inverse);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
    Ok(())
}

pub fn fft(input: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut buf = input.to_vec();
    fft_in_place(&mut buf)?;
    Ok(buf)
}

pub fn ifft(input: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut buf = input.to_vec();
    ifft_in_place(&mut buf)?;
    Ok(buf)
}
