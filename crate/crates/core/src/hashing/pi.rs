//! Exactly pairwise-independent hashing `B -> [k]`.
//!
//! Buckets are indices `0..|B|`. Each bucket is written in base `p`, the
//! smallest prime factor of `k`, using `m` digits, and hashed as
//! `h(b) = ((a . digits(b) + c) mod k) + 1` with `a` in `Z_k^m`, `c` in `Z_k`.
//! Two distinct buckets differ in some digit by a nonzero amount below `p`,
//! which is a unit mod `k`, so `(h(b), h(b'))` is exactly uniform on `[k]^2`.
//! When `p >= |B|` (in particular `k` prime and `k >= |B|`) there is a single
//! digit and this is the classic affine family `a*b + c` of size `k^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::CountingRng;

/// Cap on the number of members any enumeration may produce.
pub const ENUMERATION_CAP: u128 = 1_000_000;

fn smallest_prime_factor(k: u64) -> u64 {
    if k % 2 == 0 {
        return 2;
    }
    let mut f = 3;
    while f * f <= k {
        if k % f == 0 {
            return f;
        }
        f += 2;
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiFamily {
    k: u64,
    domain_size: u64,
    base: u64,
    digits: u32,
}

/// One member `h_{a,c}` of a [`PiFamily`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PiHash {
    pub a: Vec<u64>,
    pub c: u64,
}

impl PiHash {
    /// A single-digit (affine) member.
    pub fn affine(a: u64, c: u64) -> Self {
        Self { a: vec![a], c }
    }
}

impl PiFamily {
    /// Family of hashes from `domain_size` buckets to `[k]`.
    pub fn new(k: u64, domain_size: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("hash range k must be positive".into()));
        }
        if domain_size == 0 {
            return Err(Error::InvalidParameter("bucket set is empty".into()));
        }
        if k == 1 {
            return Ok(Self { k, domain_size, base: 1, digits: 1 });
        }
        let base = smallest_prime_factor(k);
        let mut digits = 1u32;
        let mut reach = base as u128;
        while reach < domain_size as u128 {
            reach *= base as u128;
            digits += 1;
        }
        Ok(Self { k, domain_size, base, digits })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn domain_size(&self) -> u64 {
        self.domain_size
    }

    /// Number of base-`p` digits per bucket (1 for the affine case).
    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Whether this is the single-digit affine family over `Z_k`.
    pub fn is_affine(&self) -> bool {
        self.digits == 1
    }

    pub fn size(&self) -> u128 {
        (self.k as u128).saturating_pow(self.digits + 1)
    }

    fn embed(&self, b: u64) -> Result<Vec<u64>> {
        if b >= self.domain_size {
            return Err(Error::UnknownBucket(format!("bucket index {b}")));
        }
        if self.k == 1 {
            return Ok(vec![0]);
        }
        let mut rest = b;
        let mut out = Vec::with_capacity(self.digits as usize);
        for _ in 0..self.digits {
            out.push(rest % self.base);
            rest /= self.base;
        }
        Ok(out)
    }

    /// `h(b)` in `1..=k`.
    pub fn eval(&self, h: &PiHash, b: u64) -> Result<u64> {
        let digits = self.embed(b)?;
        let k = self.k as u128;
        let mut acc = h.c as u128 % k;
        for (a, d) in h.a.iter().zip(&digits) {
            acc = (acc + (*a as u128 % k) * (*d as u128)) % k;
        }
        Ok(acc as u64 + 1)
    }

    /// Uniform member; each coefficient by rejection from `ceil(log2 k)`-bit draws.
    pub fn sample(&self, rng: &mut CountingRng) -> PiHash {
        let a = (0..self.digits).map(|_| rng.uniform_below(self.k)).collect();
        let c = rng.uniform_below(self.k);
        PiHash { a, c }
    }

    /// Every member, each with weight `1/size`.
    pub fn enumerate(&self) -> Result<Vec<PiHash>> {
        let size = self.size();
        if size > ENUMERATION_CAP {
            return Err(Error::FamilyTooLarge { size, cap: ENUMERATION_CAP });
        }
        let width = self.digits as usize + 1;
        let mut out = Vec::with_capacity(size as usize);
        let mut coeffs = vec![0u64; width];
        loop {
            out.push(PiHash {
                a: coeffs[..width - 1].to_vec(),
                c: coeffs[width - 1],
            });
            let mut i = width;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                coeffs[i] += 1;
                if coeffs[i] < self.k {
                    break;
                }
                coeffs[i] = 0;
            }
        }
    }
}
