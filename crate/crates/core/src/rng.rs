//! Random number generation used throughout the crate.
//!
//! Every random choice (initial assignments, Gibbs draws, splits, fold-in)
//! comes from [`ChainRng`], ChaCha with 8 rounds as implemented by
//! `rand_chacha::ChaCha8Rng`, seeded through `SeedableRng::seed_from_u64`.
//! Uniform reals are `rand`'s standard `f64` in `[0, 1)` (53 random bits).
//! Runs are reproducible bit-for-bit for a given seed and this generator.

use rand::Rng;

pub type ChainRng = rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function; a bijection on `u64`.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for stream `index` under `base`:
/// `splitmix64(base + (index + 1) * 0x9e3779b97f4a7c15)` with wrapping arithmetic.
///
/// For a fixed base this is injective in `index` (the multiplier is odd and
/// the mix is a bijection).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

#[inline]
pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// Inverse-CDF draw over `weights` in order using one uniform variate.
///
/// Returns the first index whose running sum exceeds `u * total`. Zero-weight
/// entries are never returned.
pub fn draw_index(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if acc > target {
                return i;
            }
        }
    }
    last_positive
}

/// Same rule as [`draw_index`] given precomputed running sums of the weights.
#[inline]
pub fn draw_from_cumulative(cumulative: &[f64], u: f64) -> usize {
    let n = cumulative.len();
    let target = u * cumulative[n - 1];
    match cumulative.iter().position(|&c| c > target) {
        Some(i) => i,
        // u * total rounded up to total; take the last entry that added mass
        None => {
            let mut i = n - 1;
            while i > 0 && cumulative[i] == cumulative[i - 1] {
                i -= 1;
            }
            i
        }
    }
}
