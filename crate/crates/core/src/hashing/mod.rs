//! Hash families: exactly pairwise-independent hashing into `[k]` and atomic
//! locality-sensitive families, both with enumeration for exact oracles.

mod lsh;
mod pi;

use serde::{Deserialize, Serialize};

pub use lsh::{LshFamily, LshMember, MINHASH_ENUMERATION_LIMIT};
pub use pi::{PiFamily, PiHash, ENUMERATION_CAP};

/// Random bits spent sampling one derandomized classifier.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitBudget {
    pub pi_bits: u64,
    pub lsh_bits: u64,
    pub total: u64,
}

impl BitBudget {
    pub fn new(pi_bits: u64, lsh_bits: u64) -> Self {
        Self {
            pi_bits,
            lsh_bits,
            total: pi_bits + lsh_bits,
        }
    }
}
