//! Estimators and exact oracles for bias, variance, fairness and loss, plus
//! closed-form bound calculators and JSON reports.
//!
//! Every estimator runs in one of two modes. Exact mode enumerates the family
//! and returns rationals; Monte Carlo mode samples `M` members with per-trial
//! seeds `(seed, trial)` and returns a value with its standard error.

pub mod bounds;
mod ensemble;
mod estimate;
mod fairness;
mod loss;
mod pairs;
mod report;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact;

pub use bounds::Bound;
pub use ensemble::Ensemble;
pub use estimate::{aggregate_bias, aggregate_variance, pairwise_unfairness, pointwise_bias, pointwise_variance};
pub use fairness::{
    aggregate_fairness, aggregate_fairness_audit, disagreement_fraction, empirical_fairness_curve,
    metric_fairness_check, scorer_fairness_check, threshold_fairness_check, CurveSource,
};
pub use loss::{decomposition_check, loss_bias_variance, loss_value, loss_value_of_classifier, LossTable};
pub use pairs::{candidate_pairs, close_pairs, PairSet};
pub use report::{FairnessReport, PairVerdict, Quantity};

/// Default cap on the number of point pairs examined.
pub const DEFAULT_PAIRS_CAP: usize = 200_000;

/// Standard errors a Monte Carlo estimate may sit above a bound.
pub const SIGMA_ACCEPT: f64 = 4.0;

/// Float slack for comparing float-valued bounds.
pub const BOUND_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    Exact,
    MonteCarlo { trials: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub mode: Mode,
    pub seed: u64,
    /// `tau`: pairs with `d <= tau` count toward aggregate fairness.
    pub pair_threshold: f64,
    /// `delta` in `(0,1)`.
    pub confidence: f64,
    pub pairs_cap: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Exact,
            seed: 0,
            pair_threshold: 0.05,
            confidence: 0.25,
            pairs_cap: DEFAULT_PAIRS_CAP,
        }
    }
}

impl EstimatorConfig {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn monte_carlo(trials: u64, seed: u64) -> Self {
        Self {
            mode: Mode::MonteCarlo { trials },
            seed,
            ..Self::default()
        }
    }

    pub fn with_pair_threshold(mut self, tau: f64) -> Self {
        self.pair_threshold = tau;
        self
    }

    pub fn with_confidence(mut self, delta: f64) -> Self {
        self.confidence = delta;
        self
    }

    pub fn with_pairs_cap(mut self, cap: usize) -> Self {
        self.pairs_cap = cap;
        self
    }

    pub fn is_exact(&self) -> bool {
        self.mode == Mode::Exact
    }

    pub fn validate(&self) -> Result<()> {
        if let Mode::MonteCarlo { trials } = self.mode {
            if trials == 0 {
                return Err(Error::InvalidParameter("trials must be >= 1".into()));
            }
        }
        if !(0.0..=1.0).contains(&self.pair_threshold) {
            return Err(Error::InvalidParameter(format!(
                "pair threshold {} is outside [0,1]",
                self.pair_threshold
            )));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "confidence {} is outside (0,1)",
                self.confidence
            )));
        }
        if self.pairs_cap == 0 {
            return Err(Error::InvalidParameter("pairs cap must be >= 1".into()));
        }
        Ok(())
    }
}

/// A measured quantity: an exact rational, or an estimate with standard error.
#[derive(Debug, Clone, PartialEq)]
pub enum Measured {
    Exact(BigRational),
    Estimate { value: f64, stderr: f64 },
}

impl Measured {
    pub fn value(&self) -> f64 {
        match self {
            Measured::Exact(r) => exact::to_f64(r),
            Measured::Estimate { value, .. } => *value,
        }
    }

    pub fn stderr(&self) -> Option<f64> {
        match self {
            Measured::Exact(_) => None,
            Measured::Estimate { stderr, .. } => Some(*stderr),
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Measured::Exact(r) => Some(r),
            Measured::Estimate { .. } => None,
        }
    }

    /// Whether the quantity is at most `bound`: exact values up to
    /// [`BOUND_TOLERANCE`], estimates within [`SIGMA_ACCEPT`] standard errors.
    pub fn at_most(&self, bound: f64) -> bool {
        match self {
            Measured::Exact(r) => exact::to_f64(r) <= bound + BOUND_TOLERANCE,
            Measured::Estimate { value, stderr } => value - SIGMA_ACCEPT * stderr <= bound + BOUND_TOLERANCE,
        }
    }

    /// Like [`Measured::at_most`] but compared in rationals when exact.
    pub fn at_most_exact(&self, bound: &BigRational) -> bool {
        match self {
            Measured::Exact(r) => r <= bound,
            Measured::Estimate { .. } => self.at_most(exact::to_f64(bound)),
        }
    }

    pub fn abs(&self) -> Measured {
        match self {
            Measured::Exact(r) => Measured::Exact(exact::abs(r)),
            Measured::Estimate { value, stderr } => Measured::Estimate {
                value: value.abs(),
                stderr: *stderr,
            },
        }
    }
}

impl std::fmt::Display for Measured {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Measured::Exact(r) => write!(f, "{r} (= {})", exact::to_f64(r)),
            Measured::Estimate { value, stderr } => write!(f, "{value} +/- {stderr}"),
        }
    }
}

/// Sample mean and its standard error.
pub(crate) fn mean_estimate(values: &[f64]) -> Measured {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return Measured::Estimate { value: mean, stderr: 0.0 };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Measured::Estimate {
        value: mean,
        stderr: (var / m).sqrt(),
    }
}

/// Unbiased sample variance and its standard error from the fourth moment.
pub(crate) fn variance_estimate(values: &[f64]) -> Measured {
    let m = values.len() as f64;
    if values.len() < 2 {
        return Measured::Estimate { value: 0.0, stderr: 0.0 };
    }
    let mean = values.iter().sum::<f64>() / m;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / m;
    Measured::Estimate {
        value: m2 * m / (m - 1.0),
        stderr: ((m4 - m2 * m2).max(0.0) / m).sqrt(),
    }
}
