use rayon::prelude::*;

use super::{EstimatorConfig, Measured, Mode};
use crate::data::Point;
use crate::derandomize::ClassifierFamily;
use crate::error::Result;
use crate::exact;
use crate::rng::CountingRng;

/// Predictions of a set of family members on a fixed list of points.
///
/// In exact mode the members are the whole family (each with equal weight);
/// in Monte Carlo mode they are `M` independent samples, trial `t` drawn from
/// `CountingRng::child(seed, t)`.
#[derive(Debug, Clone)]
pub struct Ensemble {
    members: usize,
    exact: bool,
    // Per point: bitset over members.
    cols: Vec<Vec<u64>>,
    // Per member: number of points predicted 1.
    row_ones: Vec<u32>,
}

impl Ensemble {
    pub fn build(family: &dyn ClassifierFamily, points: &[Point], cfg: &EstimatorConfig) -> Result<Self> {
        cfg.validate()?;
        let rows: Vec<Vec<bool>> = match cfg.mode {
            Mode::Exact => {
                let members = family.enumerate()?;
                members.par_iter().map(|c| c.predict_all(points)).collect::<Result<_>>()?
            }
            Mode::MonteCarlo { trials } => (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = CountingRng::child(cfg.seed, t);
                    family.sample(&mut rng)?.predict_all(points)
                })
                .collect::<Result<_>>()?,
        };
        Ok(Self::from_rows(&rows, points.len(), cfg.is_exact()))
    }

    /// Packs `rows[member][point]`.
    pub fn from_rows(rows: &[Vec<bool>], points: usize, exact: bool) -> Self {
        let words = rows.len().div_ceil(64);
        let mut cols = vec![vec![0u64; words]; points];
        let mut row_ones = Vec::with_capacity(rows.len());
        for (m, row) in rows.iter().enumerate() {
            let mut ones = 0u32;
            for (j, &bit) in row.iter().enumerate() {
                if bit {
                    cols[j][m / 64] |= 1 << (m % 64);
                    ones += 1;
                }
            }
            row_ones.push(ones);
        }
        Self {
            members: rows.len(),
            exact,
            cols,
            row_ones,
        }
    }

    pub fn members(&self) -> usize {
        self.members
    }

    pub fn points(&self) -> usize {
        self.cols.len()
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Members predicting 1 at point `j`.
    pub fn ones(&self, j: usize) -> u64 {
        self.cols[j].iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// Members whose predictions at `i` and `j` differ.
    pub fn disagreements(&self, i: usize, j: usize) -> u64 {
        self.cols[i]
            .iter()
            .zip(&self.cols[j])
            .map(|(a, b)| u64::from((a ^ b).count_ones()))
            .sum()
    }

    /// Per member, the number of `pairs` on which its two predictions differ.
    pub fn member_disagreements(&self, pairs: &[(usize, usize)]) -> Vec<u64> {
        let mut counts = vec![0u64; self.members];
        for &(i, j) in pairs {
            for (w, (a, b)) in self.cols[i].iter().zip(&self.cols[j]).enumerate() {
                let mut x = a ^ b;
                while x != 0 {
                    counts[w * 64 + x.trailing_zeros() as usize] += 1;
                    x &= x - 1;
                }
            }
        }
        counts
    }

    pub fn row_ones(&self) -> &[u32] {
        &self.row_ones
    }

    /// A member-frequency `count / members` as a measured quantity.
    pub fn frequency(&self, count: u64) -> Measured {
        let m = self.members as u64;
        if self.exact {
            return Measured::Exact(exact::ratio(count, m));
        }
        let p = count as f64 / m as f64;
        let stderr = if m < 2 { 0.0 } else { (p * (1.0 - p) / (m - 1) as f64).sqrt() };
        Measured::Estimate { value: p, stderr }
    }

    /// `E[f_hat(x_j)]`.
    pub fn mean_at(&self, j: usize) -> Measured {
        self.frequency(self.ones(j))
    }

    /// `E[|f_hat(x_i) - f_hat(x_j)|]`.
    pub fn disagreement(&self, i: usize, j: usize) -> Measured {
        self.frequency(self.disagreements(i, j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing_counts() {
        let rows: Vec<Vec<bool>> = (0..130).map(|m| vec![m % 2 == 0, m % 3 == 0, true]).collect();
        let e = Ensemble::from_rows(&rows, 3, true);
        assert_eq!(e.members(), 130);
        assert_eq!(e.ones(0), 65);
        assert_eq!(e.ones(1), 44);
        assert_eq!(e.ones(2), 130);
        let both = (0..130).filter(|m| (m % 2 == 0) != (m % 3 == 0)).count() as u64;
        assert_eq!(e.disagreements(0, 1), both);
        assert_eq!(e.row_ones()[0], 3);
        assert_eq!(e.row_ones()[1], 1);
        let per = e.member_disagreements(&[(0, 1), (1, 2)]);
        assert_eq!(per[0], 0);
        assert_eq!(per[1], 1);
        assert_eq!(per[2], 2);
    }
}
