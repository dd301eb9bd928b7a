//! Atomic locality-sensitive families: `Pr_h[h(x) != h(x')] = d(x, x')` exactly.
//!
//! Members are never concatenated; an AND of `m` members collides with
//! probability `(1 - d)^m`, which is not a metric.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{as_bit, Metric};
use crate::rng::{ceil_log2, CountingRng, NORMAL_BITS};

/// Largest universe for which MinHash permutations are enumerated.
pub const MINHASH_ENUMERATION_LIMIT: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LshFamily {
    /// Domain `{0,1}^n`, buckets `{0,1}`; a member reads one coordinate.
    BitSampling { n: usize },
    /// Domain: subsets of `{0..universe}` as 0/1 indicator vectors; a member is
    /// a permutation and the bucket is the first element present. The empty set
    /// hashes to the extra bucket `universe`.
    MinHash { universe: usize },
    /// Domain `R^dim`, buckets `{0,1}`; a member is a random unit normal.
    SimHash { dim: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum LshMember {
    Coordinate(usize),
    Permutation(Vec<u32>),
    Hyperplane(Vec<f64>),
}

fn check_len(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    Ok(())
}

impl LshFamily {
    pub fn validate(&self) -> Result<()> {
        let (what, n) = match *self {
            LshFamily::BitSampling { n } => ("bit-sampling dimension", n),
            LshFamily::MinHash { universe } => ("minhash universe", universe),
            LshFamily::SimHash { dim } => ("simhash dimension", dim),
        };
        if n == 0 {
            return Err(Error::InvalidParameter(format!("{what} must be positive")));
        }
        Ok(())
    }

    /// The metric whose distance equals this family's collision-miss probability.
    pub fn paired_metric(&self) -> Metric {
        match *self {
            LshFamily::BitSampling { n } => Metric::NormalizedHamming { n },
            LshFamily::MinHash { .. } => Metric::JaccardDistance,
            LshFamily::SimHash { .. } => Metric::Angular,
        }
    }

    /// Number of buckets `|B|`.
    pub fn codomain_size(&self) -> u64 {
        match *self {
            LshFamily::BitSampling { .. } | LshFamily::SimHash { .. } => 2,
            LshFamily::MinHash { universe } => universe as u64 + 1,
        }
    }

    pub fn input_dim(&self) -> usize {
        match *self {
            LshFamily::BitSampling { n } => n,
            LshFamily::MinHash { universe } => universe,
            LshFamily::SimHash { dim } => dim,
        }
    }

    /// Upper bound on the average bits one sample consumes.
    pub fn bit_budget(&self) -> u64 {
        match *self {
            LshFamily::BitSampling { n } => 4 * u64::from(ceil_log2(n as u64)),
            LshFamily::MinHash { universe } => {
                (2..=universe as u64).map(|i| 4 * u64::from(ceil_log2(i))).sum()
            }
            LshFamily::SimHash { dim } => u64::from(NORMAL_BITS) * dim as u64,
        }
    }

    pub fn sample(&self, rng: &mut CountingRng) -> LshMember {
        match *self {
            LshFamily::BitSampling { n } => LshMember::Coordinate(rng.uniform_below(n as u64) as usize),
            LshFamily::MinHash { universe } => {
                let mut order: Vec<u32> = (0..universe as u32).collect();
                for i in (1..universe).rev() {
                    let j = rng.uniform_below(i as u64 + 1) as usize;
                    order.swap(i, j);
                }
                LshMember::Permutation(order)
            }
            LshFamily::SimHash { dim } => loop {
                let v: Vec<f64> = (0..dim).map(|_| rng.standard_normal()).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    break LshMember::Hyperplane(v.into_iter().map(|x| x / norm).collect());
                }
            },
        }
    }

    /// Every member; each carries weight `1/len`.
    pub fn enumerate(&self) -> Result<Vec<LshMember>> {
        match *self {
            LshFamily::BitSampling { n } => Ok((0..n).map(LshMember::Coordinate).collect()),
            LshFamily::MinHash { universe } if universe <= MINHASH_ENUMERATION_LIMIT => {
                let mut out = Vec::new();
                let mut order: Vec<u32> = (0..universe as u32).collect();
                permutations(&mut order, 0, &mut out);
                Ok(out.into_iter().map(LshMember::Permutation).collect())
            }
            LshFamily::MinHash { universe } => Err(Error::NotEnumerable(format!(
                "minhash over {universe} elements exceeds the limit of {MINHASH_ENUMERATION_LIMIT}"
            ))),
            LshFamily::SimHash { .. } => {
                Err(Error::NotEnumerable("simhash has a continuous family".into()))
            }
        }
    }

    /// Family size when finite.
    pub fn size(&self) -> Option<u128> {
        match *self {
            LshFamily::BitSampling { n } => Some(n as u128),
            LshFamily::MinHash { universe } => Some((1..=universe as u128).product()),
            LshFamily::SimHash { .. } => None,
        }
    }

    /// Bucket index of `x` under `member`.
    pub fn hash(&self, member: &LshMember, x: &[f64]) -> Result<u64> {
        check_len(x, self.input_dim())?;
        match member {
            LshMember::Coordinate(i) => Ok(u64::from(as_bit(x[*i], *i)?)),
            LshMember::Permutation(order) => {
                for (i, &v) in x.iter().enumerate() {
                    as_bit(v, i)?;
                }
                Ok(order
                    .iter()
                    .find(|&&e| x[e as usize] == 1.0)
                    .map_or(x.len() as u64, |&e| u64::from(e)))
            }
            LshMember::Hyperplane(r) => {
                let dot: f64 = r.iter().zip(x).map(|(a, b)| a * b).sum();
                Ok(u64::from(dot >= 0.0))
            }
        }
    }
}

fn permutations(items: &mut Vec<u32>, start: usize, out: &mut Vec<Vec<u32>>) {
    if start + 1 >= items.len() {
        out.push(items.clone());
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permutations(items, start + 1, out);
        items.swap(start, i);
    }
}
