//! Witnesses for the negative results: a dataset on which pairwise-independent
//! derandomization is unfair at every pair, and a grid search for fairness
//! violations of any finite deterministic family.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::DeterministicClassifier;
use crate::data::{Dataset, Point};
use crate::error::{Error, Result};
use crate::exact;
use crate::measure::scorer_fairness_check;
use crate::metric::{FairnessParams, Metric};
use crate::scorer::StochasticScorer;

/// Largest grid the violation search will materialize.
pub const GRID_POINT_CAP: usize = 10_000_000;

/// `N` points on a circle of radius `delta` in the first two coordinates,
/// scored alternately `(1 + eps)/2` and `(1 - eps)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereConstruction {
    pub n_points: usize,
    pub dim: usize,
    pub radius: f64,
    pub gap: f64,
    pub k: u64,
    pub alpha: f64,
    pub beta: f64,
}

impl SphereConstruction {
    /// Validates the construction's parameter constraints.
    pub fn new(n_points: usize, dim: usize, radius: f64, gap: f64, k: u64, alpha: f64, beta: f64) -> Result<Self> {
        let c = Self {
            n_points,
            dim,
            radius,
            gap,
            k,
            alpha,
            beta,
        };
        c.validate()?;
        Ok(c)
    }

    /// Picks the score gap and radius automatically for the given `N, k, alpha, beta`.
    pub fn auto(n_points: usize, dim: usize, k: u64, alpha: f64, beta: f64) -> Result<Self> {
        if n_points < 2 || k == 0 {
            return Err(Error::InvalidParameter("need N >= 2 and k >= 1".into()));
        }
        FairnessParams::new(alpha, beta)?;
        let slack = 0.5 - beta - 0.5 / k as f64;
        if slack <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "beta = {beta} must be below 1/2 - 1/(2k) = {}",
                0.5 - 0.5 / k as f64
            )));
        }
        let s = (std::f64::consts::PI / n_points as f64).sin();
        let gap = s * slack / (2.0 * (alpha + s));
        let radius = 0.9 * (slack - gap) / (2.0 * alpha);
        Self::new(n_points, dim, radius, gap, k, alpha, beta)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n_points < 2 || self.n_points % 2 != 0 {
            return bad(format!("point count {} must be even and >= 2", self.n_points));
        }
        if self.dim < 2 {
            return bad(format!("dimension {} must be >= 2", self.dim));
        }
        if self.k == 0 {
            return bad("k must be >= 1".into());
        }
        FairnessParams::new(self.alpha, self.beta)?;
        let half_k = 0.5 / self.k as f64;
        if self.beta >= 0.5 - half_k {
            return bad(format!("beta = {} must be below 1/2 - 1/(2k) = {}", self.beta, 0.5 - half_k));
        }
        if !(self.gap > 0.0 && self.gap < 0.5 - half_k - self.beta) {
            return bad(format!(
                "score gap {} must lie in (0, 1/2 - 1/(2k) - beta = {})",
                self.gap,
                0.5 - half_k - self.beta
            ));
        }
        let max_radius = (0.5 - self.beta - self.gap - half_k) / (2.0 * self.alpha);
        if !(self.radius > 0.0 && self.radius < max_radius) {
            return bad(format!("radius {} must lie in (0, {max_radius})", self.radius));
        }
        let max_gap = 2.0 * self.radius * (std::f64::consts::PI / self.n_points as f64).sin();
        if self.gap > max_gap {
            return bad(format!(
                "{} points at chord spacing {} do not fit on a circle of radius {} (largest spacing {max_gap})",
                self.n_points, self.gap, self.radius
            ));
        }
        Ok(())
    }

    pub fn metric(&self) -> Metric {
        Metric::ScaledEuclidean { scale: 1.0 }
    }

    /// `1/2 - eps - 1/(2k)`, the guaranteed per-pair unfairness.
    pub fn unfairness_floor(&self) -> BigRational {
        exact::ratio(1, 2) - exact::decimal(self.gap) - exact::ratio(1, 2 * self.k)
    }

    pub fn params(&self) -> FairnessParams {
        FairnessParams {
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}

fn place(c: &SphereConstruction, step: f64) -> Vec<Vec<f64>> {
    (0..c.n_points)
        .map(|i| {
            let a = step * i as f64;
            let mut v = vec![0.0; c.dim];
            v[0] = c.radius * a.cos();
            v[1] = c.radius * a.sin();
            v
        })
        .collect()
}

/// Builds the dataset and its (1,0)-fair tabular scorer.
///
/// Consecutive points sit `gap` apart along the circle (chord length), so
/// every pairwise distance is at least `gap`, while all distances stay below
/// the diameter `2 * radius`.
pub fn sphere_counterexample(c: &SphereConstruction) -> Result<(Dataset, StochasticScorer)> {
    c.validate()?;
    let metric = c.metric();
    let hi = (1.0 + c.gap) / 2.0;
    let lo = (1.0 - c.gap) / 2.0;
    let score_gap = hi - lo;
    let mut step = 2.0 * (c.gap / (2.0 * c.radius)).asin();
    let mut coords = place(c, step);
    for _ in 0..64 {
        let mut min_d = f64::INFINITY;
        for i in 0..coords.len() {
            for j in (i + 1)..coords.len() {
                min_d = min_d.min(metric.distance(&coords[i], &coords[j])?);
            }
        }
        if min_d >= score_gap {
            break;
        }
        step = step.next_up();
        coords = place(c, step);
    }
    let points: Vec<Point> = coords
        .into_iter()
        .enumerate()
        .map(|(i, v)| Point::new(format!("s{i}"), v))
        .collect();
    let scorer = StochasticScorer::tabular(
        points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id.clone(), if i % 2 == 0 { hi } else { lo })),
    )?;
    let dataset = Dataset::new(points)?;
    let check = scorer_fairness_check(&scorer, &dataset, &metric, &FairnessParams::new(1.0, 0.0)?, usize::MAX, 0)?;
    if !check.all_satisfied() {
        return Err(Error::InvalidParameter(
            "sphere placement did not produce a (1,0)-fair scorer".into(),
        ));
    }
    Ok((dataset, scorer))
}

/// Regular grid on the box `[lower, upper]` with `steps[i] + 1` points per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainGrid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub steps: Vec<usize>,
}

impl DomainGrid {
    /// Grid with spacing at most `step` on every axis.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, step: f64) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidParameter("grid bounds must have equal, positive length".into()));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidParameter(format!("grid step {step} must be positive")));
        }
        let mut steps = Vec::with_capacity(lower.len());
        for (l, u) in lower.iter().zip(&upper) {
            if u.partial_cmp(l) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::InvalidParameter(format!("empty grid interval [{l}, {u}]")));
            }
            steps.push((((u - l) / step) - 1e-9).ceil().max(1.0) as usize);
        }
        let g = Self { lower, upper, steps };
        if g.len() > GRID_POINT_CAP as u128 {
            return Err(Error::InvalidParameter(format!(
                "grid of {} points exceeds the cap of {GRID_POINT_CAP}",
                g.len()
            )));
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn len(&self) -> u128 {
        self.steps.iter().map(|&s| s as u128 + 1).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn coordinate(&self, axis: usize, i: usize) -> f64 {
        let (l, u) = (self.lower[axis], self.upper[axis]);
        l + (u - l) * i as f64 / self.steps[axis] as f64
    }

    fn unrank(&self, mut r: usize) -> Vec<usize> {
        self.steps
            .iter()
            .map(|&s| {
                let i = r % (s + 1);
                r /= s + 1;
                i
            })
            .collect()
    }

    fn rank(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.steps)
            .rev()
            .fold(0, |acc, (&i, &s)| acc * (s + 1) + i)
    }

    pub fn point(&self, idx: &[usize]) -> Point {
        let v: Vec<f64> = idx.iter().enumerate().map(|(a, &i)| self.coordinate(a, i)).collect();
        let name: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        Point::new(format!("grid-{}", name.join("-")), v)
    }

    /// Largest distance between grid neighbours under `metric`.
    pub fn spacing(&self, metric: &Metric) -> Result<f64> {
        let origin = vec![0usize; self.dim()];
        let base = self.point(&origin);
        let mut worst: f64 = 0.0;
        for a in 0..self.dim() {
            let mut idx = origin.clone();
            idx[a] = 1;
            worst = worst.max(metric.eval(&base, &self.point(&idx))?);
        }
        Ok(worst)
    }
}

/// A pair violating `E|f_hat(x) - f_hat(x*)| <= alpha d + beta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub x: Point,
    pub x_star: Point,
    pub distance: f64,
    /// Family-average prediction gap, exact.
    #[serde(serialize_with = "ser_ratio")]
    pub unfairness: BigRational,
    pub allowance: f64,
}

fn ser_ratio<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Scans grid-adjacent pairs for a fairness violation of the uniform
/// distribution over `family`.
///
/// Requires `beta < 1/|family|` and neighbour spacing below
/// `(1/|family| - beta) / alpha`, so any member changing value between
/// neighbours yields a violation. Returns `None` when every member is
/// constant on the grid.
pub fn finite_family_violation_search(
    family: &[DeterministicClassifier],
    metric: &Metric,
    grid: &DomainGrid,
    params: &FairnessParams,
) -> Result<Option<Violation>> {
    metric.validate()?;
    if family.is_empty() {
        return Err(Error::InvalidParameter("empty family".into()));
    }
    let inv = 1.0 / family.len() as f64;
    if params.beta >= inv {
        return Err(Error::InvalidParameter(format!(
            "beta = {} must be below 1/|family| = {inv}",
            params.beta
        )));
    }
    let required = (inv - params.beta) / params.alpha;
    let spacing = grid.spacing(metric)?;
    if spacing >= required {
        return Err(Error::GridTooCoarse { spacing, required });
    }
    let n = grid.len() as usize;
    let preds: Vec<Vec<bool>> = (0..n)
        .into_par_iter()
        .map(|r| {
            let p = grid.point(&grid.unrank(r));
            family.iter().map(|c| c.predict(&p)).collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<_>>()?;
    for r in 0..n {
        let idx = grid.unrank(r);
        for axis in 0..grid.dim() {
            if idx[axis] == grid.steps[axis] {
                continue;
            }
            let mut nb = idx.clone();
            nb[axis] += 1;
            let r2 = grid.rank(&nb);
            let differ = preds[r].iter().zip(&preds[r2]).filter(|(a, b)| a != b).count();
            if differ == 0 {
                continue;
            }
            let x = grid.point(&idx);
            let x_star = grid.point(&nb);
            let d = metric.eval(&x, &x_star)?;
            let unfairness = exact::ratio(differ as u64, family.len() as u64);
            let allowance = params.allowance(d);
            if exact::to_f64(&unfairness) > allowance {
                return Ok(Some(Violation {
                    x,
                    x_star,
                    distance: d,
                    unfairness,
                    allowance,
                }));
            }
        }
    }
    Ok(None)
}
