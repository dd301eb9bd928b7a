use num_bigint::BigInt;
use num_rational::BigRational;

use super::{mean_estimate, variance_estimate, Ensemble, EstimatorConfig, Measured};
use crate::data::{Dataset, Point};
use crate::derandomize::ClassifierFamily;
use crate::error::{Error, Result};
use crate::exact;
use crate::scorer::StochasticScorer;

/// `E[f_hat(x)] - f(x)`.
pub fn pointwise_bias(
    family: &dyn ClassifierFamily,
    scorer: &StochasticScorer,
    x: &Point,
    cfg: &EstimatorConfig,
) -> Result<Measured> {
    let ens = Ensemble::build(family, std::slice::from_ref(x), cfg)?;
    let f = scorer.score(x)?;
    Ok(match ens.mean_at(0) {
        Measured::Exact(m) => Measured::Exact(m - exact::decimal(f)),
        Measured::Estimate { value, stderr } => Measured::Estimate { value: value - f, stderr },
    })
}

/// `Var(f_hat(x))` across the family.
pub fn pointwise_variance(family: &dyn ClassifierFamily, x: &Point, cfg: &EstimatorConfig) -> Result<Measured> {
    let ens = Ensemble::build(family, std::slice::from_ref(x), cfg)?;
    Ok(bernoulli_variance(&ens, ens.ones(0)))
}

pub(crate) fn bernoulli_variance(ens: &Ensemble, ones: u64) -> Measured {
    let m = ens.members() as u64;
    if ens.is_exact() {
        let p = exact::ratio(ones, m);
        return Measured::Exact(&p * (exact::one() - &p));
    }
    let p = ones as f64 / m as f64;
    let q = 1.0 - p;
    let mf = m as f64;
    if m < 2 {
        return Measured::Estimate { value: 0.0, stderr: 0.0 };
    }
    let m2 = p * q;
    let m4 = p * q * (p.powi(3) + q.powi(3));
    Measured::Estimate {
        value: m2 * mf / (mf - 1.0),
        stderr: ((m4 - m2 * m2).max(0.0) / mf).sqrt(),
    }
}

/// Dataset average of the pointwise bias.
pub fn aggregate_bias(
    family: &dyn ClassifierFamily,
    scorer: &StochasticScorer,
    dataset: &Dataset,
    cfg: &EstimatorConfig,
) -> Result<Measured> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let ens = Ensemble::build(family, dataset.points(), cfg)?;
    aggregate_bias_of(&ens, scorer, dataset.points())
}

pub(crate) fn aggregate_bias_of(ens: &Ensemble, scorer: &StochasticScorer, points: &[Point]) -> Result<Measured> {
    let n = points.len() as u64;
    let scores = points.iter().map(|p| scorer.score(p)).collect::<Result<Vec<f64>>>()?;
    if ens.is_exact() {
        let ones: u64 = (0..points.len()).map(|j| ens.ones(j)).sum();
        let fsum: BigRational = scores.iter().map(|&f| exact::decimal(f)).sum();
        let mean_pred = exact::ratio(ones, ens.members() as u64 * n);
        return Ok(Measured::Exact(mean_pred - fsum / BigRational::from_integer(BigInt::from(n))));
    }
    let fmean = scores.iter().sum::<f64>() / n as f64;
    let member_means: Vec<f64> = ens.row_ones().iter().map(|&c| c as f64 / n as f64).collect();
    let est = mean_estimate(&member_means);
    Ok(Measured::Estimate {
        value: est.value() - fmean,
        stderr: est.stderr().unwrap_or(0.0),
    })
}

/// Variance across members of the member's dataset-mean prediction.
pub fn aggregate_variance(family: &dyn ClassifierFamily, dataset: &Dataset, cfg: &EstimatorConfig) -> Result<Measured> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let ens = Ensemble::build(family, dataset.points(), cfg)?;
    Ok(aggregate_variance_of(&ens))
}

pub(crate) fn aggregate_variance_of(ens: &Ensemble) -> Measured {
    let n = ens.points() as u64;
    if ens.is_exact() {
        let f = BigInt::from(ens.members());
        let (sum, sum_sq) = ens.row_ones().iter().fold((BigInt::from(0), BigInt::from(0)), |(s, q), &c| {
            let c = BigInt::from(c);
            (s + &c, q + &c * &c)
        });
        let num = &f * sum_sq - &sum * &sum;
        let den = &f * &f * BigInt::from(n) * BigInt::from(n);
        return Measured::Exact(BigRational::new(num, den));
    }
    let member_means: Vec<f64> = ens.row_ones().iter().map(|&c| c as f64 / n as f64).collect();
    variance_estimate(&member_means)
}

/// `E[|f_hat(x) - f_hat(x2)|]`.
pub fn pairwise_unfairness(
    family: &dyn ClassifierFamily,
    x: &Point,
    x2: &Point,
    cfg: &EstimatorConfig,
) -> Result<Measured> {
    let ens = Ensemble::build(family, &[x.clone(), x2.clone()], cfg)?;
    Ok(ens.disagreement(0, 1))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::derandomize::{Bucketer, FiniteFamily, PiDerandomizer, RtDerandomizer};
    use crate::DeterministicClassifier;

    fn constant(c: f64) -> Arc<StochasticScorer> {
        Arc::new(StochasticScorer::constant(c).unwrap())
    }

    #[test]
    fn pointwise_bias_examples() {
        let x = Point::new("x", vec![0.0]);
        let cfg = EstimatorConfig::exact();
        let rt = RtDerandomizer::new(constant(0.3), 10).unwrap();
        assert_eq!(pointwise_bias(&rt, rt.scorer(), &x, &cfg).unwrap(), Measured::Exact(exact::zero()));

        let ds = Dataset::new(vec![x.clone()]).unwrap();
        let pi = PiDerandomizer::new(constant(0.5), Arc::new(Bucketer::identity(&ds)), 5).unwrap();
        assert_eq!(
            pointwise_bias(&pi, pi.scorer(), &x, &cfg).unwrap(),
            Measured::Exact(-exact::ratio(1, 10))
        );

        let ones = FiniteFamily(vec![DeterministicClassifier::constant(true)]);
        let s = StochasticScorer::constant(1.0).unwrap();
        assert_eq!(pointwise_bias(&ones, &s, &x, &cfg).unwrap(), Measured::Exact(exact::zero()));
    }

    #[test]
    fn variance_examples() {
        let x = Point::new("x", vec![0.0]);
        let ds = Dataset::new(vec![x.clone()]).unwrap();
        let cfg = EstimatorConfig::exact();
        let rt = RtDerandomizer::new(constant(0.5), 10).unwrap();
        assert_eq!(aggregate_variance(&rt, &ds, &cfg).unwrap(), Measured::Exact(exact::ratio(1, 4)));
        assert_eq!(pointwise_variance(&rt, &x, &cfg).unwrap(), Measured::Exact(exact::ratio(1, 4)));
        let det = RtDerandomizer::new(constant(1.0), 10).unwrap();
        assert_eq!(aggregate_variance(&det, &ds, &cfg).unwrap(), Measured::Exact(exact::zero()));
    }

    #[test]
    fn singleton_aggregate_equals_pointwise() {
        let x = Point::new("x", vec![0.0]);
        let ds = Dataset::new(vec![x.clone()]).unwrap();
        let rt = RtDerandomizer::new(constant(0.37), 7).unwrap();
        let cfg = EstimatorConfig::exact();
        assert_eq!(
            aggregate_bias(&rt, rt.scorer(), &ds, &cfg).unwrap(),
            pointwise_bias(&rt, rt.scorer(), &x, &cfg).unwrap()
        );
    }

    #[test]
    fn monte_carlo_reports_stderr() {
        let x = Point::new("x", vec![0.0]);
        let rt = RtDerandomizer::new(constant(0.5), 10).unwrap();
        let m = pointwise_bias(&rt, rt.scorer(), &x, &EstimatorConfig::monte_carlo(4000, 3)).unwrap();
        let se = m.stderr().unwrap();
        assert!(se > 0.0 && m.value().abs() < 4.0 * se + 1e-12);
    }

    #[test]
    fn empty_dataset_rejected() {
        let rt = RtDerandomizer::new(constant(0.5), 10).unwrap();
        let ds = Dataset::new(vec![]).unwrap();
        assert_eq!(
            aggregate_bias(&rt, rt.scorer(), &ds, &EstimatorConfig::exact()).unwrap_err(),
            Error::EmptyDataset
        );
    }
}
