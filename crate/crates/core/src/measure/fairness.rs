use num_rational::BigRational;

use super::bounds::{self, Bound};
use super::pairs::{candidate_pairs, close_pairs, PairSet};
use super::{mean_estimate, Ensemble, EstimatorConfig, FairnessReport, Measured, PairVerdict, BOUND_TOLERANCE};
use crate::classifier::DeterministicClassifier;
use crate::data::{Dataset, Point};
use crate::derandomize::{ClassifierFamily, FamilyKind};
use crate::error::{Error, Result};
use crate::exact;
use crate::metric::{FairnessParams, Metric};
use crate::scorer::StochasticScorer;

/// Pair verdicts are listed in full up to this many pairs, otherwise only
/// the violating ones.
const FULL_VERDICT_LIMIT: usize = 1000;

/// `alpha * d + beta` as a rational, when the metric has exact distances.
fn exact_allowance(params: &FairnessParams, metric: &Metric, a: &Point, b: &Point) -> Option<BigRational> {
    let d = metric.exact_distance(a.fairness_view(), b.fairness_view()).ok()??;
    Some(exact::decimal(params.alpha) * d + exact::decimal(params.beta))
}

fn pair_ok(gap: &Measured, allowance: f64, exact_allowance: Option<&BigRational>) -> bool {
    match (gap, exact_allowance) {
        (Measured::Exact(g), Some(a)) => g <= a,
        _ => gap.at_most(allowance),
    }
}

fn pair_report(
    dataset: &Dataset,
    metric: &Metric,
    params: &FairnessParams,
    pairs: &PairSet,
    gaps: &[Measured],
) -> FairnessReport {
    let pts = dataset.points();
    let mut report = FairnessReport::new();
    let mut verdicts = Vec::with_capacity(pairs.len());
    let mut violations = 0u64;
    let mut max_excess = f64::NEG_INFINITY;
    for (((i, j), d), gap) in pairs.pairs.iter().zip(&pairs.distances).zip(gaps) {
        let allowance = params.allowance(*d);
        let exact_a = if gap.as_exact().is_some() {
            exact_allowance(params, metric, &pts[*i], &pts[*j])
        } else {
            None
        };
        let ok = pair_ok(gap, allowance, exact_a.as_ref());
        violations += u64::from(!ok);
        max_excess = max_excess.max(gap.value() - allowance);
        verdicts.push(PairVerdict {
            a: pts[*i].id.clone(),
            b: pts[*j].id.clone(),
            distance: *d,
            value: gap.value(),
            stderr: gap.stderr(),
            allowance,
            satisfied: ok,
        });
    }
    report.count("pairs_checked", pairs.len() as u64);
    report.bounded_with(
        "violations",
        &Measured::Exact(exact::ratio(violations, 1)),
        Bound {
            value: 0.0,
            source: bounds::METRIC_FAIRNESS,
        },
        violations == 0,
    );
    if !pairs.is_empty() {
        report.value("max_excess", max_excess);
    }
    report.note("alpha", params.alpha);
    report.note("beta", params.beta);
    report.note("pairs_total", pairs.total);
    if let Some(s) = pairs.sampling_seed {
        report.note("pair_sampling_seed", s);
    }
    if verdicts.len() > FULL_VERDICT_LIMIT {
        verdicts.retain(|v| !v.satisfied);
        report.note("pair_verdicts", "violations");
    } else {
        report.note("pair_verdicts", "all");
    }
    report.pairs = verdicts;
    report
}

/// Checks `E|f_hat(x) - f_hat(x')| <= alpha d(x,x') + beta` on every pair
/// (or on `pairs_cap` sampled pairs).
pub fn metric_fairness_check(
    family: &dyn ClassifierFamily,
    dataset: &Dataset,
    metric: &Metric,
    params: &FairnessParams,
    cfg: &EstimatorConfig,
) -> Result<FairnessReport> {
    metric.validate()?;
    let ens = Ensemble::build(family, dataset.points(), cfg)?;
    let pairs = candidate_pairs(dataset, metric, cfg.pairs_cap, cfg.seed)?;
    let gaps: Vec<Measured> = pairs.pairs.iter().map(|&(i, j)| ens.disagreement(i, j)).collect();
    let mut report = pair_report(dataset, metric, params, &pairs, &gaps);
    report.note("members", ens.members());
    report.note("mode", cfg.mode);
    Ok(report)
}

/// Checks `|f(x) - f(x')| <= alpha d(x,x') + beta` for a scorer, exactly on
/// the decimal reading of the scores.
pub fn scorer_fairness_check(
    scorer: &StochasticScorer,
    dataset: &Dataset,
    metric: &Metric,
    params: &FairnessParams,
    pairs_cap: usize,
    seed: u64,
) -> Result<FairnessReport> {
    metric.validate()?;
    let scores: Vec<BigRational> = dataset
        .points()
        .iter()
        .map(|p| scorer.score(p).map(exact::decimal))
        .collect::<Result<_>>()?;
    let pairs = candidate_pairs(dataset, metric, pairs_cap, seed)?;
    let gaps: Vec<Measured> = pairs
        .pairs
        .iter()
        .map(|&(i, j)| Measured::Exact(exact::abs(&(&scores[i] - &scores[j]))))
        .collect();
    Ok(pair_report(dataset, metric, params, &pairs, &gaps))
}

/// Fraction of `pairs` on which `preds` differ.
pub fn disagreement_fraction(preds: &[bool], pairs: &PairSet) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("no pairs".into()));
    }
    let diff = pairs.pairs.iter().filter(|&&(i, j)| preds[i] != preds[j]).count();
    Ok(diff as f64 / pairs.len() as f64)
}

/// `rho_{<=tau}`: fraction of distinct pairs with `d <= tau` that the
/// classifier separates.
pub fn aggregate_fairness(
    classifier: &DeterministicClassifier,
    dataset: &Dataset,
    metric: &Metric,
    tau: f64,
) -> Result<f64> {
    let pairs = close_pairs(dataset, metric, tau, usize::MAX, 0)?;
    let preds = classifier.predict_all(dataset.points())?;
    disagreement_fraction(&preds, &pairs)
}

/// Samples (or enumerates) classifiers and reports the fraction whose
/// `rho_{<=tau}` exceeds `rho_bound`, to be compared with `delta`.
pub fn aggregate_fairness_audit(
    family: &dyn ClassifierFamily,
    dataset: &Dataset,
    metric: &Metric,
    rho_bound: Bound,
    cfg: &EstimatorConfig,
) -> Result<FairnessReport> {
    metric.validate()?;
    let tau = cfg.pair_threshold;
    let pairs = close_pairs(dataset, metric, tau, cfg.pairs_cap, cfg.seed)?;
    let ens = Ensemble::build(family, dataset.points(), cfg)?;
    let counts = ens.member_disagreements(&pairs.pairs);
    let p = pairs.len() as f64;
    let rhos: Vec<f64> = counts.iter().map(|&c| c as f64 / p).collect();
    let over = rhos.iter().filter(|&&r| r > rho_bound.value + BOUND_TOLERANCE).count() as u64;

    let mut report = FairnessReport::new();
    report.count("close_pairs", pairs.len() as u64);
    report.count("classifiers", ens.members() as u64);
    report.measured(
        "rho_mean",
        &if ens.is_exact() {
            Measured::Exact(exact::ratio(counts.iter().sum(), ens.members() as u64 * pairs.len() as u64))
        } else {
            mean_estimate(&rhos)
        },
    );
    report.value("rho_max", rhos.iter().cloned().fold(0.0, f64::max));
    let exceed = ens.frequency(over);
    report.bounded(
        "exceeding_fraction",
        &exceed,
        Bound {
            value: cfg.confidence,
            source: rho_bound.source,
        },
    );
    let within = match &exceed {
        Measured::Exact(r) => Measured::Exact(exact::one() - r),
        Measured::Estimate { value, stderr } => Measured::Estimate {
            value: 1.0 - value,
            stderr: *stderr,
        },
    };
    report.measured("within_fraction", &within);
    report.note("rho_bound", rho_bound);
    report.note("tau", tau);
    report.note("delta", cfg.confidence);
    report.note("mode", cfg.mode);
    report.note("pairs_total", pairs.total);
    if let Some(s) = pairs.sampling_seed {
        report.note("pair_sampling_seed", s);
    }
    Ok(report)
}

/// Over pairs with `d <= sigma`, checks `E|f_hat(x) - f_hat(x')| <= tau`,
/// and evaluates the family's threshold-fairness guarantee when it has one.
pub fn threshold_fairness_check(
    family: &dyn ClassifierFamily,
    dataset: &Dataset,
    metric: &Metric,
    sigma: f64,
    tau: f64,
    cfg: &EstimatorConfig,
) -> Result<FairnessReport> {
    if !(sigma > 0.0 && sigma < 1.0 && tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidParameter("sigma and tau must lie in (0,1)".into()));
    }
    metric.validate()?;
    let guarantee = match family.kind() {
        FamilyKind::Ls { k, .. } if k as f64 >= 4.0 / sigma => Some(bounds::ls_threshold(sigma, tau, k)?),
        FamilyKind::Rt { k } => Some(bounds::rt_threshold(tau, k)?),
        _ => None,
    };
    let pairs = candidate_pairs(dataset, metric, cfg.pairs_cap, cfg.seed)?.within(sigma);
    let mut report = FairnessReport::new();
    report.count("pairs_checked", pairs.len() as u64);
    report.note("sigma", sigma);
    report.note("tau", tau);
    if let Some(g) = guarantee {
        report.note(
            "guarantee",
            serde_json::json!({ "sigma": sigma, "tau": g.value, "source": g.source }),
        );
    }
    if pairs.is_empty() {
        report.bounded_with(
            "tau_violations",
            &Measured::Exact(exact::zero()),
            Bound {
                value: 0.0,
                source: "threshold fairness",
            },
            true,
        );
        return Ok(report);
    }
    let ens = Ensemble::build(family, dataset.points(), cfg)?;
    let gaps: Vec<Measured> = pairs.pairs.iter().map(|&(i, j)| ens.disagreement(i, j)).collect();
    let tau_violations = gaps.iter().filter(|g| !g.at_most(tau)).count() as u64;
    report.bounded_with(
        "tau_violations",
        &Measured::Exact(exact::ratio(tau_violations, 1)),
        Bound {
            value: 0.0,
            source: "threshold fairness",
        },
        tau_violations == 0,
    );
    let worst = gaps
        .iter()
        .max_by(|a, b| a.value().total_cmp(&b.value()))
        .expect("non-empty")
        .clone();
    match guarantee {
        Some(g) => {
            let ok = gaps.iter().all(|m| m.at_most(g.value));
            report.bounded_with("max_gap", &worst, g, ok);
        }
        None => report.measured("max_gap", &worst),
    }
    report.note("mode", cfg.mode);
    if let Some(s) = pairs.sampling_seed {
        report.note("pair_sampling_seed", s);
    }
    Ok(report)
}

/// What the fairness curve measures pair gaps on.
pub enum CurveSource<'a> {
    Scorer(&'a StochasticScorer),
    Family(&'a dyn ClassifierFamily),
}

/// For each `alpha_hat`, `beta_hat = mean over pairs of max(gap - alpha_hat d, 0)`.
pub fn empirical_fairness_curve(
    source: CurveSource<'_>,
    dataset: &Dataset,
    metric: &Metric,
    alphas: &[f64],
    cfg: &EstimatorConfig,
) -> Result<Vec<(f64, f64)>> {
    if dataset.len() < 2 {
        return Err(Error::InvalidParameter("fairness curve needs at least 2 points".into()));
    }
    metric.validate()?;
    let pairs = candidate_pairs(dataset, metric, cfg.pairs_cap, cfg.seed)?;
    let gaps: Vec<f64> = match source {
        CurveSource::Scorer(s) => {
            let scores = dataset.points().iter().map(|p| s.score(p)).collect::<Result<Vec<f64>>>()?;
            pairs.pairs.iter().map(|&(i, j)| (scores[i] - scores[j]).abs()).collect()
        }
        CurveSource::Family(f) => {
            let ens = Ensemble::build(f, dataset.points(), cfg)?;
            pairs.pairs.iter().map(|&(i, j)| ens.disagreement(i, j).value()).collect()
        }
    };
    let n = gaps.len() as f64;
    Ok(alphas
        .iter()
        .map(|&a| {
            let beta = gaps
                .iter()
                .zip(&pairs.distances)
                .map(|(g, d)| (g - a * d).max(0.0))
                .sum::<f64>()
                / n;
            (a, beta)
        })
        .collect())
}
