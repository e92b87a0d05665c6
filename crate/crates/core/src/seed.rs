//! Counter-based seed derivation.
//!
//! Every random quantity in the crate is a pure function of a 64-bit key, so
//! results never depend on evaluation order or thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Absorbs `words` into `seed`, one mixing round per word.
#[inline]
pub fn derive(seed: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(mix64(seed.wrapping_add(GOLDEN)), |acc, &w| {
            mix64(acc ^ mix64(w.wrapping_add(GOLDEN)))
        })
}

/// Uniform draw in `[0, 1)` with 53 bits of resolution, keyed on `key`.
#[inline]
pub fn unit_uniform(key: u64) -> f64 {
    (mix64(key) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Named sub-streams split off one base seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Operator = 1,
    Signal = 2,
    MeasurementDither = 3,
    MatrixDither = 4,
    Probe = 5,
}

impl Stream {
    pub fn of(self, base: u64) -> u64 {
        derive(base, &[0x5354_5245_414d, self as u64])
    }
}

/// Sequential generator for quantities drawn in bulk (operators, signals).
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
