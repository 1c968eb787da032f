//! Counter-based random streams.
//!
//! Every stochastic quantity in the crate is drawn from a [`Stream`], which
//! hashes `(key, counter)` with the SplitMix64 finalizer. Streams are cheap to
//! fork, so each sample, layer or epoch gets its own key derived via [`mix`].

use std::f64::consts::PI;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
#[inline]
pub fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one 64-bit seed.
pub fn mix(words: &[u64]) -> u64 {
    let mut h = 0x6A09_E667_F3BC_C909u64;
    for &w in words {
        h = finalize(h ^ finalize(w.wrapping_add(GOLDEN)));
        h = h.rotate_left(23).wrapping_mul(GOLDEN);
    }
    finalize(h)
}

/// A counter-based uniform generator with Box-Muller Gaussian sampling.
#[derive(Debug, Clone)]
pub struct Stream {
    key: u64,
    counter: u64,
    spare: Option<f64>,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream {
            key: finalize(seed ^ 0xD1B5_4A32_D192_ED03),
            counter: 0,
            spare: None,
        }
    }

    /// Derives an independent stream tagged by `tag`.
    pub fn fork(&self, tag: u64) -> Stream {
        Stream::new(mix(&[self.key, tag]))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let out = finalize(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)));
        self.counter = self.counter.wrapping_add(1);
        out
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi]`.
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer on `lo..=hi`.
    pub fn int_in(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(hi >= lo);
        let span = hi - lo + 1;
        // Lemire-style rejection to avoid modulo bias
        let zone = u64::MAX - (u64::MAX % span);
        loop {
            let r = self.next_u64();
            if r < zone {
                return lo + r % span;
            }
        }
    }

    /// Index in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        self.int_in(0, n as u64 - 1) as usize
    }

    /// Phase uniform on `[0, 2π)`.
    pub fn phase(&mut self) -> f64 {
        2.0 * PI * self.uniform()
    }

    /// Standard normal draw via Box-Muller; the second variate is cached.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(g) = self.spare.take() {
            return g;
        }
        let u1 = 1.0 - self.uniform(); // (0, 1]
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
