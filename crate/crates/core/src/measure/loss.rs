use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::{self, Bound};
use super::estimate::bernoulli_variance;
use super::{Ensemble, EstimatorConfig, FairnessReport, Measured};
use crate::classifier::DeterministicClassifier;
use crate::data::Point;
use crate::derandomize::ClassifierFamily;
use crate::error::{Error, Result};
use crate::exact;
use crate::rng::{derive_seed, CountingRng};
use crate::scorer::StochasticScorer;

/// A binary loss `l(prediction, label)` with values in `{0,1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LossTable {
    /// Indexed by `2 * prediction + label`.
    values: [u8; 4],
}

impl LossTable {
    /// `l(0,0), l(0,1), l(1,0), l(1,1)`.
    pub fn new(l00: u8, l01: u8, l10: u8, l11: u8) -> Result<Self> {
        let values = [l00, l01, l10, l11];
        if values.iter().any(|&v| v > 1) {
            return Err(Error::InvalidParameter("loss values must be 0 or 1".into()));
        }
        Ok(Self { values })
    }

    pub fn misclassification() -> Self {
        Self { values: [0, 1, 1, 0] }
    }

    /// All 16 binary loss tables.
    pub fn all() -> Vec<LossTable> {
        (0u8..16)
            .map(|mask| Self {
                values: [mask & 1, (mask >> 1) & 1, (mask >> 2) & 1, (mask >> 3) & 1],
            })
            .collect()
    }

    pub fn get(&self, prediction: bool, label: u8) -> u8 {
        self.values[2 * usize::from(prediction) + usize::from(label & 1)]
    }
}

fn check_label(y: u8) -> Result<()> {
    if y > 1 {
        return Err(Error::InvalidParameter(format!("label {y} is not 0 or 1")));
    }
    Ok(())
}

/// `p l(1,y) + (1-p) l(0,y)` for a probability `p` of predicting 1.
pub fn loss_value(p: f64, y: u8, loss: &LossTable) -> f64 {
    p * f64::from(loss.get(true, y)) + (1.0 - p) * f64::from(loss.get(false, y))
}

/// Loss of a deterministic classifier (the 0/1 special case).
pub fn loss_value_of_classifier(
    classifier: &DeterministicClassifier,
    x: &Point,
    y: u8,
    loss: &LossTable,
) -> Result<f64> {
    check_label(y)?;
    Ok(f64::from(loss.get(classifier.predict(x)?, y)))
}

/// `(|E L(f_hat,x,y) - L(f,x,y)|, Var L(f_hat,x,y))`.
///
/// `L` is affine in the prediction with slope `s = l(1,y) - l(0,y)`, so these
/// are `|s| |bias|` and `s^2 Var(f_hat(x))`.
pub fn loss_bias_variance(
    family: &dyn ClassifierFamily,
    scorer: &StochasticScorer,
    x: &Point,
    y: u8,
    loss: &LossTable,
    cfg: &EstimatorConfig,
) -> Result<(Measured, Measured)> {
    check_label(y)?;
    let ens = Ensemble::build(family, std::slice::from_ref(x), cfg)?;
    let f = scorer.score(x)?;
    let slope = i32::from(loss.get(true, y)) - i32::from(loss.get(false, y));
    let s2 = (slope * slope) as u64;
    let var = match bernoulli_variance(&ens, ens.ones(0)) {
        Measured::Exact(v) => Measured::Exact(v * exact::ratio(s2, 1)),
        Measured::Estimate { value, stderr } => Measured::Estimate {
            value: value * s2 as f64,
            stderr: stderr * s2 as f64,
        },
    };
    let bias = match ens.mean_at(0) {
        Measured::Exact(m) => Measured::Exact(exact::abs(&(m - exact::decimal(f))) * exact::ratio(s2, 1)),
        Measured::Estimate { value, stderr } => Measured::Estimate {
            value: (value - f).abs() * s2 as f64,
            stderr: stderr * s2 as f64,
        },
    };
    Ok((bias, var))
}

/// Draws per independent seed stream in the joint simulation.
const JOINT_CHUNK: u64 = 4096;
/// Seed stream for the joint simulation, apart from ensemble trials.
const JOINT_STREAM: u64 = 1 << 62;

/// Compares `E|f_hat(x) - 1_f(x)|`, estimated from `draws` joint samples of
/// a family member and a Bernoulli realization, with
/// `|bias| + 2 (f(1-f) + Var f_hat(x))^(2/3)`.
pub fn decomposition_check(
    family: &dyn ClassifierFamily,
    scorer: &StochasticScorer,
    x: &Point,
    draws: u64,
    cfg: &EstimatorConfig,
) -> Result<FairnessReport> {
    if draws < 2 {
        return Err(Error::InvalidParameter("joint simulation needs at least 2 draws".into()));
    }
    let f = scorer.score(x)?;
    let ens = Ensemble::build(family, std::slice::from_ref(x), cfg)?;
    let bias = match ens.mean_at(0) {
        Measured::Exact(m) => Measured::Exact(m - exact::decimal(f)),
        Measured::Estimate { value, stderr } => Measured::Estimate { value: value - f, stderr },
    };
    let family_var = bernoulli_variance(&ens, ens.ones(0));
    let fr = exact::decimal(f);
    let scorer_var = Measured::Exact(&fr * (exact::one() - &fr));

    let base = derive_seed(cfg.seed, JOINT_STREAM);
    let chunks = draws.div_ceil(JOINT_CHUNK);
    let mismatches: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = CountingRng::child(base, c);
            let n = JOINT_CHUNK.min(draws - c * JOINT_CHUNK);
            let mut miss = 0u64;
            for _ in 0..n {
                let pred = family.sample(&mut rng)?.predict(x)?;
                let bit = rng.bernoulli(f);
                miss += u64::from(pred != bit);
            }
            Ok(miss)
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum();
    let p = mismatches as f64 / draws as f64;
    let lhs = Measured::Estimate {
        value: p,
        stderr: (p * (1.0 - p) / (draws - 1) as f64).sqrt(),
    };
    let rhs: Bound = bounds::decomposition(bias.value(), scorer_var.value(), family_var.value())?;

    let mut report = FairnessReport::new();
    report.bounded("realization_gap", &lhs, rhs);
    report.measured("bias", &bias);
    report.measured("scorer_variance", &scorer_var);
    report.measured("family_variance", &family_var);
    report.note("draws", draws);
    report.note("mode", cfg.mode);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::derandomize::{FiniteFamily, RtDerandomizer};

    #[test]
    fn loss_formula() {
        let mis = LossTable::misclassification();
        assert!((loss_value(0.7, 1, &mis) - 0.3).abs() < 1e-12);
        let zero = LossTable::new(0, 0, 0, 0).unwrap();
        let one = LossTable::new(1, 1, 1, 1).unwrap();
        assert_eq!(loss_value(0.7, 1, &zero), 0.0);
        assert_eq!(loss_value(0.7, 0, &one), 1.0);
        assert_eq!(LossTable::all().len(), 16);
        assert!(LossTable::new(2, 0, 0, 0).is_err());
        let clf = DeterministicClassifier::constant(true);
        let x = Point::new("x", vec![0.0]);
        assert_eq!(loss_value_of_classifier(&clf, &x, 1, &mis).unwrap(), 0.0);
        assert_eq!(loss_value_of_classifier(&clf, &x, 0, &mis).unwrap(), 1.0);
    }

    #[test]
    fn constant_loss_has_no_bias_or_variance() {
        let s = Arc::new(StochasticScorer::constant(0.3).unwrap());
        let rt = RtDerandomizer::new(s.clone(), 10).unwrap();
        let x = Point::new("x", vec![0.0]);
        for l in [LossTable::new(0, 0, 0, 0).unwrap(), LossTable::new(1, 1, 1, 1).unwrap()] {
            let (b, v) = loss_bias_variance(&rt, &s, &x, 1, &l, &EstimatorConfig::exact()).unwrap();
            assert_eq!(b, Measured::Exact(exact::zero()));
            assert_eq!(v, Measured::Exact(exact::zero()));
        }
    }

    #[test]
    fn deterministic_scores_decomposition() {
        let s = StochasticScorer::constant(1.0).unwrap();
        let fam = FiniteFamily(vec![DeterministicClassifier::constant(true)]);
        let x = Point::new("x", vec![0.0]);
        let r = decomposition_check(&fam, &s, &x, 1000, &EstimatorConfig::exact()).unwrap();
        assert_eq!(r.get("realization_gap").unwrap().value, 0.0);
        assert!(r.all_satisfied());
    }

    #[test]
    fn half_score_decomposition() {
        let s = Arc::new(StochasticScorer::constant(0.5).unwrap());
        let rt = RtDerandomizer::new(s.clone(), 10).unwrap();
        let x = Point::new("x", vec![0.0]);
        let r = decomposition_check(&rt, &s, &x, 20_000, &EstimatorConfig::exact()).unwrap();
        let q = r.get("realization_gap").unwrap();
        assert!((q.bound.unwrap() - 2.0 * 0.5f64.powf(2.0 / 3.0)).abs() < 1e-12);
        assert!(r.all_satisfied());
        // Independent draws: Pr[f_hat != bit] = 1/2.
        assert!((q.value - 0.5).abs() < 4.0 * q.stderr.unwrap());
    }
}
