//! Numerically careful building blocks shared across the crate: log-sum-exp
//! accumulation, fixed-order pairwise summation, and counter-style RNG
//! substreams for reproducible parallel Monte Carlo.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// log(e^a + e^b) without overflow. `NEG_INFINITY` is the additive identity,
/// so empty accumulations start from it.
#[inline(always)]
pub fn logsumexp2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// log Σ e^{x_i}. Returns `NEG_INFINITY` on an empty slice.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Cascade (pairwise) summation. The reduction tree depends only on the
/// slice length, so the result is identical no matter how the values were
/// produced, and rounding error grows like O(log n) instead of O(n).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean and standard error of the mean (sample std / √n).
/// The standard error is 0 for fewer than two samples.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|&x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// SplitMix64 finalizer: a cheap, well-mixed bijection on u64.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Tags separating the independent uses of the master seed, so that e.g.
/// walk sampling never replays environment noise.
pub mod rng_domain {
    pub const ENV: u64 = 0x656e_7669_726f;
    pub const WALK: u64 = 0x7761_6c6b;
    pub const CIRCLE: u64 = 0x6369_7263_6c65;
    pub const PAIRS: u64 = 0x7061_6972_73;
}

/// A ChaCha8 stream keyed by (seed, domain, lane, index). Distinct keys give
/// statistically independent streams, and the derivation is a pure function
/// of the four integers, so parallel workers can build their own streams in
/// any order and still reproduce a serial run bit for bit.
pub fn substream(seed: u64, domain: u64, lane: u64, index: u64) -> ChaCha8Rng {
    let h0 = mix64(seed ^ 0x9E37_79B9_7F4A_7C15);
    let h1 = mix64(h0 ^ domain.wrapping_mul(0xA24B_AED4_963E_E407));
    let h2 = mix64(h1 ^ lane.wrapping_mul(0x9FB2_1C65_1E98_DF25));
    let h3 = mix64(h2 ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&h0.to_le_bytes());
    key[8..16].copy_from_slice(&h1.to_le_bytes());
    key[16..24].copy_from_slice(&h2.to_le_bytes());
    key[24..32].copy_from_slice(&h3.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
