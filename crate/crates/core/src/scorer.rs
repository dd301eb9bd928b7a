use std::collections::HashMap;

use crate::data::Point;
use crate::error::{Error, Result};
use crate::rng::CountingRng;

/// A stochastic binary classifier `f: X -> [0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum StochasticScorer {
    /// Scores looked up by point id.
    Tabular(HashMap<String, f64>),
    /// `clamp(w . x + b, 0, 1)` on the inference features.
    Affine { weights: Vec<f64>, bias: f64 },
    Constant(f64),
}

fn check_unit(v: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter(format!("{what} score {v} is outside [0,1]")));
    }
    Ok(())
}

impl StochasticScorer {
    pub fn tabular(entries: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let mut table = HashMap::new();
        for (id, s) in entries {
            check_unit(s, &format!("tabular entry `{id}`"))?;
            if table.insert(id.clone(), s).is_some() {
                return Err(Error::DuplicateId(id));
            }
        }
        Ok(Self::Tabular(table))
    }

    pub fn constant(c: f64) -> Result<Self> {
        check_unit(c, "constant")?;
        Ok(Self::Constant(c))
    }

    pub fn affine(weights: Vec<f64>, bias: f64) -> Result<Self> {
        if weights.iter().chain([&bias]).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("affine scorer has non-finite weights".into()));
        }
        Ok(Self::Affine { weights, bias })
    }

    pub fn score(&self, x: &Point) -> Result<f64> {
        match self {
            Self::Tabular(t) => t.get(&x.id).copied().ok_or_else(|| Error::UnknownPoint(x.id.clone())),
            Self::Affine { weights, bias } => {
                if weights.len() != x.features.len() {
                    return Err(Error::DimensionMismatch {
                        expected: weights.len(),
                        found: x.features.len(),
                    });
                }
                let dot: f64 = weights.iter().zip(&x.features).map(|(w, v)| w * v).sum();
                Ok((dot + bias).clamp(0.0, 1.0))
            }
            Self::Constant(c) => Ok(*c),
        }
    }

    /// Draw the Bernoulli realization `1_f(x) ~ Bern(f(x))`.
    pub fn bernoulli_realize(&self, x: &Point, rng: &mut CountingRng) -> Result<bool> {
        let p = self.score(x)?;
        Ok(rng.bernoulli(p))
    }
}
