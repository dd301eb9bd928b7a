//! Strategic responses: an agent at `x` may move to `x'` at cost `c(x, x')`
//! and gains the classifier's (expected) prediction at `x'`.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{Dataset, Point};
use crate::derandomize::ClassifierFamily;
use crate::error::{Error, Result};
use crate::measure::{Ensemble, EstimatorConfig};
use crate::metric::{FairnessParams, Metric};
use crate::scorer::StochasticScorer;

/// Slack allowed when comparing a gain with its bound.
pub const GAIN_TOLERANCE: f64 = 1e-9;

/// Utilities closer than this are ties, broken by lowest id.
const TIE_EPS: f64 = 1e-12;

/// A metric used as the cost of moving between points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostFunction {
    pub metric: Metric,
}

impl CostFunction {
    pub fn new(metric: Metric) -> Result<Self> {
        metric.validate()?;
        Ok(Self { metric })
    }

    pub fn cost(&self, x: &Point, x2: &Point) -> Result<f64> {
        self.metric.eval(x, x2)
    }
}

/// What the agent is responding to.
#[derive(Clone, Copy)]
pub enum Agent<'a> {
    Scorer(&'a StochasticScorer),
    /// Family-average prediction, exact or estimated per the config.
    Family(&'a dyn ClassifierFamily, &'a EstimatorConfig),
}

impl Agent<'_> {
    fn values(&self, points: &[Point]) -> Result<Vec<f64>> {
        match self {
            Agent::Scorer(s) => points.iter().map(|p| s.score(p)).collect(),
            Agent::Family(f, cfg) => {
                let ens = Ensemble::build(*f, points, cfg)?;
                Ok((0..points.len()).map(|j| ens.mean_at(j).value()).collect())
            }
        }
    }
}

/// `U(x, x') = f(x') - c(x, x')`.
pub fn utility(agent: Agent<'_>, x: &Point, x2: &Point, cost: &CostFunction) -> Result<f64> {
    let v = agent.values(std::slice::from_ref(x2))?;
    Ok(v[0] - cost.cost(x, x2)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtilityReport {
    pub origin: Point,
    pub best_response: Point,
    /// `U(x, best) - U(x, x)`.
    pub utility_gain: f64,
    /// `(alpha - 1) c(x, best) + beta`.
    pub bound: f64,
    pub within_bound: bool,
}

/// JSON row form of a [`UtilityReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtilityRow {
    pub origin: String,
    pub response: String,
    pub gain: f64,
    pub bound: f64,
    pub ok: bool,
}

impl UtilityReport {
    pub fn row(&self) -> UtilityRow {
        UtilityRow {
            origin: self.origin.id.clone(),
            response: self.best_response.id.clone(),
            gain: self.utility_gain,
            bound: self.bound,
            ok: self.within_bound,
        }
    }
}

fn respond(
    origin: &Point,
    origin_value: f64,
    candidates: &[Point],
    values: &[f64],
    cost: &CostFunction,
    params: &FairnessParams,
) -> Result<UtilityReport> {
    let stay = origin_value;
    let mut best: (f64, &Point, f64) = (stay, origin, 0.0);
    for (p, &v) in candidates.iter().zip(values) {
        let c = cost.cost(origin, p)?;
        let u = v - c;
        let better = u > best.0 + TIE_EPS || ((u - best.0).abs() <= TIE_EPS && p.id < best.1.id);
        if better {
            best = (u, p, c);
        }
    }
    let gain = best.0 - stay;
    let bound = (params.alpha - 1.0) * best.2 + params.beta;
    Ok(UtilityReport {
        origin: origin.clone(),
        best_response: best.1.clone(),
        utility_gain: gain,
        bound,
        within_bound: gain <= bound + GAIN_TOLERANCE,
    })
}

/// Best response of `x` over `candidates` (plus staying at `x`); ties go
/// to the lowest id.
pub fn best_response(
    agent: Agent<'_>,
    x: &Point,
    candidates: &Dataset,
    cost: &CostFunction,
    params: &FairnessParams,
) -> Result<UtilityReport> {
    if candidates.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut pts = candidates.points().to_vec();
    pts.push(x.clone());
    let values = agent.values(&pts)?;
    let n = candidates.len();
    respond(x, values[n], &pts[..n], &values[..n], cost, params)
}

/// Best responses for every candidate taken as the origin.
pub fn best_responses(
    agent: Agent<'_>,
    candidates: &Dataset,
    cost: &CostFunction,
    params: &FairnessParams,
) -> Result<Vec<UtilityReport>> {
    if candidates.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let pts = candidates.points();
    let values = agent.values(pts)?;
    pts.par_iter()
        .zip(values.par_iter())
        .map(|(x, &v)| respond(x, v, pts, &values, cost, params))
        .collect()
}
