//! Independent oracles and generators shared by the integration tests.
//!
//! The oracles rebuild every family member from scratch with rational
//! arithmetic and never call the library's hashing or estimators.

#![allow(dead_code)]

use std::sync::Arc;

use fairderand::{Dataset, Point, StochasticScorer};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A score in `[0,1]` with three decimals, exact as a rational.
pub fn decimal_score(r: &mut impl Rng) -> (f64, BigRational) {
    let m: i64 = r.gen_range(0..=1000);
    (m as f64 / 1000.0, q(m, 1000))
}

/// The value of the shortest decimal that prints as `f`.
pub fn decimal(f: f64) -> BigRational {
    let s = format!("{f}");
    let (neg, s) = match s.strip_prefix('-') {
        Some(r) => (true, r.to_string()),
        None => (false, s),
    };
    let (int, frac) = s.split_once('.').unwrap_or((&s, ""));
    let num: BigInt = format!("{int}{frac}").parse().unwrap();
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(num, den);
    if neg {
        -r
    } else {
        r
    }
}

pub fn tabular(ds: &Dataset, scores: &[f64]) -> Arc<StochasticScorer> {
    Arc::new(
        StochasticScorer::tabular(ds.points().iter().zip(scores).map(|(p, &f)| (p.id.clone(), f))).unwrap(),
    )
}

pub fn line_dataset(n: usize, spacing: f64) -> Dataset {
    Dataset::new((0..n).map(|i| Point::new(format!("p{i:03}"), vec![i as f64 * spacing])).collect()).unwrap()
}

pub fn binary_dataset(r: &mut impl Rng, n: usize, dim: usize) -> Dataset {
    Dataset::new(
        (0..n)
            .map(|i| Point::new(format!("b{i:03}"), (0..dim).map(|_| f64::from(r.gen_range(0..2u8))).collect()))
            .collect(),
    )
    .unwrap()
}

/// Number of `u in 1..=k` with `f >= u/k`, i.e. `floor(f k)` clamped.
pub fn oracle_count(f: &BigRational, k: u64) -> u64 {
    let v = (f * BigRational::from_integer(BigInt::from(k))).floor().to_integer();
    v.to_u64().unwrap_or(0).min(k)
}

pub fn oracle_predict(f: &BigRational, h: u64, k: u64) -> bool {
    f * BigRational::from_integer(BigInt::from(k)) >= BigRational::from_integer(BigInt::from(h))
}

fn smallest_prime_factor(k: u64) -> u64 {
    (2..=k).find(|p| k % p == 0).unwrap_or(k)
}

/// Pairwise-independent hashes `[domain] -> [k]` written as coefficient
/// vectors over base-`p` digits, all of them, as value tables `h[b]`.
pub fn oracle_pi_tables(k: u64, domain: u64) -> Vec<Vec<u64>> {
    let p = smallest_prime_factor(k);
    let mut m = 1u32;
    while k > 1 && p.pow(m) < domain {
        m += 1;
    }
    let digits = |b: u64| -> Vec<u64> {
        let mut out = vec![];
        let mut r = b;
        for _ in 0..m {
            out.push(if k == 1 { 0 } else { r % p });
            r /= p.max(2);
        }
        out
    };
    let width = m as usize + 1;
    let total = k.pow(width as u32);
    (0..total)
        .map(|code| {
            let mut coeffs = vec![];
            let mut r = code;
            for _ in 0..width {
                coeffs.push(r % k);
                r /= k;
            }
            (0..domain)
                .map(|b| {
                    let d = digits(b);
                    let s: u64 = coeffs[..m as usize].iter().zip(&d).map(|(a, x)| a * x).sum::<u64>() + coeffs[m as usize];
                    s % k + 1
                })
                .collect()
        })
        .collect()
}

/// Prediction rows `[member][point]` for the pairwise-independent scheme.
pub fn oracle_pi_rows(k: u64, buckets: &[u64], domain: u64, scores: &[BigRational]) -> Vec<Vec<bool>> {
    oracle_pi_tables(k, domain)
        .iter()
        .map(|h| buckets.iter().zip(scores).map(|(&b, f)| oracle_predict(f, h[b as usize], k)).collect())
        .collect()
}

pub fn oracle_rt_rows(k: u64, scores: &[BigRational]) -> Vec<Vec<bool>> {
    (1..=k).map(|u| scores.iter().map(|f| oracle_predict(f, u, k)).collect()).collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut v = p.clone();
            v.insert(pos, n - 1);
            out.push(v);
        }
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub enum OracleLsh {
    Bits(usize),
    MinHash(usize),
}

impl OracleLsh {
    /// All members as bucket tables over the given binary vectors, plus `|B|`.
    pub fn buckets(&self, xs: &[Vec<f64>]) -> (Vec<Vec<u64>>, u64) {
        match *self {
            OracleLsh::Bits(n) => ((0..n).map(|i| xs.iter().map(|x| x[i] as u64).collect()).collect(), 2),
            OracleLsh::MinHash(u) => (
                permutations(u)
                    .into_iter()
                    .map(|perm| {
                        xs.iter()
                            .map(|x| perm.iter().find(|&&e| x[e] == 1.0).map_or(u as u64, |&e| e as u64))
                            .collect()
                    })
                    .collect(),
                u as u64 + 1,
            ),
        }
    }
}

/// Prediction rows for the LSH-composed scheme.
pub fn oracle_ls_rows(k: u64, lsh: OracleLsh, xs: &[Vec<f64>], scores: &[BigRational]) -> Vec<Vec<bool>> {
    let (members, domain) = lsh.buckets(xs);
    let tables = oracle_pi_tables(k, domain);
    let mut rows = vec![];
    for m in &members {
        for h in &tables {
            rows.push(m.iter().zip(scores).map(|(&b, f)| oracle_predict(f, h[b as usize], k)).collect());
        }
    }
    rows
}

pub fn oracle_mean(rows: &[Vec<bool>], j: usize) -> BigRational {
    let ones = rows.iter().filter(|r| r[j]).count() as i64;
    q(ones, rows.len() as i64)
}

pub fn oracle_disagreement(rows: &[Vec<bool>], i: usize, j: usize) -> BigRational {
    let d = rows.iter().filter(|r| r[i] != r[j]).count() as i64;
    q(d, rows.len() as i64)
}

/// `(1/N) sum_j (mean_j - f_j)`.
pub fn oracle_aggregate_bias(rows: &[Vec<bool>], scores: &[BigRational]) -> BigRational {
    let n = scores.len() as i64;
    let s: BigRational = (0..scores.len()).map(|j| oracle_mean(rows, j) - &scores[j]).sum();
    s / q(n, 1)
}

/// Population variance over members of the member's dataset mean.
pub fn oracle_aggregate_variance(rows: &[Vec<bool>]) -> BigRational {
    let n = rows[0].len() as i64;
    let means: Vec<BigRational> = rows.iter().map(|r| q(r.iter().filter(|&&b| b).count() as i64, n)).collect();
    let m = q(means.len() as i64, 1);
    let mu: BigRational = means.iter().cloned().sum::<BigRational>() / &m;
    means.iter().map(|x| (x - &mu) * (x - &mu)).sum::<BigRational>() / m
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap()
}

pub fn abs(r: &BigRational) -> BigRational {
    r.abs()
}

pub fn is_zero(r: &BigRational) -> bool {
    r.is_zero()
}

/// Hamming distance `|a - b|_0 / n` as a rational.
pub fn hamming(a: &[f64], b: &[f64]) -> BigRational {
    let d = a.iter().zip(b).filter(|(x, y)| x != y).count() as i64;
    q(d, a.len() as i64)
}

/// Jaccard distance of 0/1 vectors as a rational (0 for two empty sets).
pub fn jaccard(a: &[f64], b: &[f64]) -> BigRational {
    let inter = a.iter().zip(b).filter(|(x, y)| **x == 1.0 && **y == 1.0).count() as i64;
    let union = a.iter().zip(b).filter(|(x, y)| **x == 1.0 || **y == 1.0).count() as i64;
    if union == 0 {
        return q(0, 1);
    }
    q(union - inter, union)
}
