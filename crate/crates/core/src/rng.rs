//! Seeded randomness that keeps an exact count of the random bits it hands out.
//!
//! Every draw goes through [`CountingRng::next_bits`], which serves bits from a
//! 64-bit reservoir refilled by a ChaCha8 stream. Nothing is discarded except by
//! rejection loops, so `bits_consumed` is the sample complexity of whatever was
//! drawn.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Bits consumed by one Bernoulli realization.
pub const BERNOULLI_BITS: u32 = 32;
/// Bits consumed by one standard normal (two 32-bit uniforms through Box-Muller).
pub const NORMAL_BITS: u32 = 64;

const TWO_POW_32: f64 = 4_294_967_296.0;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Number of bits needed to write every value in `0..n`.
pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Derive a child seed for task `index` of a parent seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

#[derive(Debug, Clone)]
pub struct CountingRng {
    seed: u64,
    inner: ChaCha8Rng,
    reservoir: u64,
    available: u32,
    bits_consumed: u64,
}

impl CountingRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
            reservoir: 0,
            available: 0,
            bits_consumed: 0,
        }
    }

    /// Independent stream for task `index`, e.g. one Monte Carlo trial.
    pub fn child(seed: u64, index: u64) -> Self {
        Self::new(derive_seed(seed, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bits_consumed(&self) -> u64 {
        self.bits_consumed
    }

    /// Draw `n <= 64` uniform bits.
    pub fn next_bits(&mut self, n: u32) -> u64 {
        assert!(n <= 64, "cannot draw more than 64 bits at once");
        self.bits_consumed += u64::from(n);
        let mut out = 0u64;
        let mut need = n;
        while need > 0 {
            if self.available == 0 {
                self.reservoir = self.inner.next_u64();
                self.available = 64;
            }
            let take = need.min(self.available);
            if take == 64 {
                out = self.reservoir;
                self.reservoir = 0;
            } else {
                let chunk = self.reservoir & ((1u64 << take) - 1);
                self.reservoir >>= take;
                out = (out << take) | chunk;
            }
            self.available -= take;
            need -= take;
        }
        out
    }

    /// Uniform integer in `0..n` by rejection from `ceil(log2 n)`-bit draws.
    pub fn uniform_below(&mut self, n: u64) -> u64 {
        assert!(n >= 1, "empty range");
        let bits = ceil_log2(n);
        loop {
            let v = self.next_bits(bits);
            if v < n {
                return v;
            }
        }
    }

    /// One draw of Bern(p); always 32 bits.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        let u = self.next_bits(BERNOULLI_BITS) as f64;
        u < p * TWO_POW_32
    }

    /// Standard normal via Box-Muller; always 64 bits.
    pub fn standard_normal(&mut self) -> f64 {
        let a = self.next_bits(32) as f64;
        let b = self.next_bits(32) as f64;
        let u1 = (a + 1.0) / TWO_POW_32;
        let u2 = b / TWO_POW_32;
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

impl RngCore for CountingRng {
    fn next_u32(&mut self) -> u32 {
        self.next_bits(32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.next_bits(64)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for b in dest.iter_mut() {
            *b = self.next_bits(8) as u8;
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_small_values() {
        let got: Vec<u32> = (1..=9).map(ceil_log2).collect();
        assert_eq!(got, vec![0, 1, 2, 2, 3, 3, 3, 3, 4]);
    }

    #[test]
    fn equal_seeds_replay_identically() {
        let mut a = CountingRng::new(17);
        let mut b = CountingRng::new(17);
        for n in [1u32, 7, 64, 3, 32, 0, 13] {
            assert_eq!(a.next_bits(n), b.next_bits(n));
        }
        assert_eq!(a.uniform_below(11), b.uniform_below(11));
        assert_eq!(a.bits_consumed(), b.bits_consumed());
    }

    #[test]
    fn bit_counter_tracks_draws() {
        let mut r = CountingRng::new(3);
        r.next_bits(5);
        r.next_bits(64);
        r.bernoulli(0.3);
        r.standard_normal();
        assert_eq!(r.bits_consumed(), 5 + 64 + 32 + 64);
    }

    #[test]
    fn reservoir_concatenates_across_refills() {
        // 60 + 8 bits straddle a refill; the draws must still be in range.
        let mut r = CountingRng::new(9);
        assert!(r.next_bits(60) < 1 << 60);
        assert!(r.next_bits(8) < 256);
    }

    #[test]
    fn degenerate_bernoulli() {
        let mut r = CountingRng::new(1);
        for _ in 0..1000 {
            assert!(r.bernoulli(1.0));
            assert!(!r.bernoulli(0.0));
        }
    }

    #[test]
    fn bernoulli_half_mean() {
        let mut r = CountingRng::new(2024);
        let n = 100_000;
        let ones = (0..n).filter(|_| r.bernoulli(0.5)).count();
        let mean = ones as f64 / n as f64;
        assert!((mean - 0.5).abs() <= 0.01, "mean {mean}");
    }

    #[test]
    fn normal_moments() {
        let mut r = CountingRng::new(5);
        let n = 50_000;
        let xs: Vec<f64> = (0..n).map(|_| r.standard_normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.03);
        assert!((var - 1.0).abs() < 0.03);
    }

    #[test]
    fn children_differ_from_each_other() {
        let a = CountingRng::child(1, 0).next_bits(64);
        let b = CountingRng::child(1, 1).next_bits(64);
        assert_ne!(a, b);
    }
}
