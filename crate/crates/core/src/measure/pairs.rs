use rand::seq::index;
use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::rng::{derive_seed, CountingRng};

/// Seed stream reserved for pair sampling.
const PAIR_STREAM: u64 = u64::MAX;

/// Distinct unordered point pairs `(i, j)`, `i < j`, with their distances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSet {
    pub pairs: Vec<(usize, usize)>,
    pub distances: Vec<f64>,
    /// Number of distinct pairs in the dataset.
    pub total: u64,
    /// Seed used when `total` exceeded the cap and pairs were sampled.
    pub sampling_seed: Option<u64>,
}

impl PairSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn sampled(&self) -> bool {
        self.sampling_seed.is_some()
    }

    /// Keeps pairs with distance at most `max`.
    pub fn within(mut self, max: f64) -> Self {
        let keep: Vec<bool> = self.distances.iter().map(|&d| d <= max).collect();
        let mut k = keep.iter();
        self.pairs.retain(|_| *k.next().unwrap());
        self.distances.retain(|&d| d <= max);
        self
    }
}

fn unrank(n: usize, sorted: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(sorted.len());
    let mut row = 0usize;
    let mut row_start = 0usize;
    for &r in sorted {
        while r >= row_start + (n - 1 - row) {
            row_start += n - 1 - row;
            row += 1;
        }
        out.push((row, row + 1 + (r - row_start)));
    }
    out
}

/// All pairs of the dataset when there are at most `cap`; otherwise `cap`
/// pairs sampled uniformly without replacement from a seed derived from `seed`.
pub fn candidate_pairs(dataset: &Dataset, metric: &Metric, cap: usize, seed: u64) -> Result<PairSet> {
    let n = dataset.len();
    let total = n * n.saturating_sub(1) / 2;
    let (pairs, sampling_seed) = if total <= cap {
        let mut pairs = Vec::with_capacity(total);
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((i, j));
            }
        }
        (pairs, None)
    } else {
        let s = derive_seed(seed, PAIR_STREAM);
        let mut rng = CountingRng::new(s);
        let mut ranks = index::sample(&mut rng, total, cap).into_vec();
        ranks.sort_unstable();
        (unrank(n, &ranks), Some(s))
    };
    let pts = dataset.points();
    let distances = pairs
        .iter()
        .map(|&(i, j)| metric.eval(&pts[i], &pts[j]))
        .collect::<Result<Vec<f64>>>()?;
    Ok(PairSet {
        pairs,
        distances,
        total: total as u64,
        sampling_seed,
    })
}

/// Candidate pairs with `d <= tau`; errors if there are none.
pub fn close_pairs(dataset: &Dataset, metric: &Metric, tau: f64, cap: usize, seed: u64) -> Result<PairSet> {
    let set = candidate_pairs(dataset, metric, cap, seed)?.within(tau);
    if set.is_empty() {
        return Err(Error::EmptyPairSet(tau));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Point;

    fn line(n: usize) -> Dataset {
        Dataset::new((0..n).map(|i| Point::new(format!("p{i}"), vec![i as f64])).collect()).unwrap()
    }

    #[test]
    fn all_pairs_under_cap() {
        let ds = line(5);
        let m = Metric::ScaledEuclidean { scale: 10.0 };
        let set = candidate_pairs(&ds, &m, 100, 0).unwrap();
        assert_eq!(set.len(), 10);
        assert!(!set.sampled());
        assert_eq!(set.clone().within(0.1).len(), 4);
    }

    #[test]
    fn sampled_pairs_are_distinct_and_valid() {
        let ds = line(40);
        let m = Metric::ScaledEuclidean { scale: 100.0 };
        let set = candidate_pairs(&ds, &m, 100, 9).unwrap();
        assert_eq!(set.len(), 100);
        assert!(set.sampled());
        let mut p = set.pairs.clone();
        p.dedup();
        assert_eq!(p.len(), 100);
        assert!(p.iter().all(|&(i, j)| i < j && j < 40));
        assert_eq!(set, candidate_pairs(&ds, &m, 100, 9).unwrap());
    }

    #[test]
    fn unrank_covers_everything() {
        let n = 7;
        let all: Vec<usize> = (0..21).collect();
        let pairs = unrank(n, &all);
        let mut want = vec![];
        for i in 0..n {
            for j in (i + 1)..n {
                want.push((i, j));
            }
        }
        assert_eq!(pairs, want);
    }

    #[test]
    fn no_close_pairs() {
        let ds = line(3);
        let m = Metric::ScaledEuclidean { scale: 1.0 };
        assert_eq!(close_pairs(&ds, &m, 0.5, 100, 0).unwrap_err(), Error::EmptyPairSet(0.5));
    }
}
