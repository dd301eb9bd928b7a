use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::data::Point;
use crate::error::{Error, Result};
use crate::exact;

/// Distance functions `d: X^2 -> [0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Metric {
    /// Fraction of differing coordinates among `n`.
    NormalizedHamming { n: usize },
    /// Angle between the vectors divided by pi.
    Angular,
    /// `1 - |A & B| / |A | B|` on 0/1 indicator vectors.
    JaccardDistance,
    /// `min(|x - x'|_2 / scale, 1)`. Has no LSH family here.
    ScaledEuclidean { scale: f64 },
}

fn same_dim(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

pub(crate) fn as_bit(v: f64, index: usize) -> Result<bool> {
    if v == 0.0 {
        Ok(false)
    } else if v == 1.0 {
        Ok(true)
    } else {
        Err(Error::NonBinaryFeature { index, value: v })
    }
}

fn jaccard_counts(a: &[f64], b: &[f64]) -> Result<(u64, u64)> {
    let mut inter = 0;
    let mut union = 0;
    for (i, (&x, &y)) in a.iter().zip(b).enumerate() {
        let (x, y) = (as_bit(x, i)?, as_bit(y, i)?);
        inter += u64::from(x && y);
        union += u64::from(x || y);
    }
    Ok((inter, union))
}

impl Metric {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Metric::NormalizedHamming { n: 0 } => {
                Err(Error::InvalidParameter("hamming dimension must be positive".into()))
            }
            Metric::ScaledEuclidean { scale } if !(scale.is_finite() && scale > 0.0) => {
                Err(Error::InvalidParameter(format!("euclidean scale {scale} must be positive")))
            }
            _ => Ok(()),
        }
    }

    /// Distance between two raw vectors.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        same_dim(a, b)?;
        match *self {
            Metric::NormalizedHamming { n } => {
                if a.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: a.len(),
                    });
                }
                let diff = a.iter().zip(b).filter(|(x, y)| x != y).count();
                Ok(diff as f64 / n as f64)
            }
            Metric::Angular => {
                let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
                let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
                if na == 0.0 || nb == 0.0 {
                    return Err(Error::ZeroVector);
                }
                if a == b {
                    return Ok(0.0);
                }
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let cos = (dot / (na * nb)).clamp(-1.0, 1.0);
                Ok(cos.acos() / std::f64::consts::PI)
            }
            Metric::JaccardDistance => {
                let (inter, union) = jaccard_counts(a, b)?;
                if union == 0 {
                    return Ok(0.0);
                }
                Ok(1.0 - inter as f64 / union as f64)
            }
            Metric::ScaledEuclidean { scale } => {
                let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                Ok((sq.sqrt() / scale).min(1.0))
            }
        }
    }

    /// Distance on the points' fairness view (fairness features when present).
    pub fn eval(&self, x: &Point, x2: &Point) -> Result<f64> {
        self.distance(x.fairness_view(), x2.fairness_view())
    }

    /// Exact rational distance for the metrics that have one.
    pub fn exact_distance(&self, a: &[f64], b: &[f64]) -> Result<Option<BigRational>> {
        same_dim(a, b)?;
        match *self {
            Metric::NormalizedHamming { n } => {
                self.distance(a, b)?;
                let diff = a.iter().zip(b).filter(|(x, y)| x != y).count() as u64;
                Ok(Some(exact::ratio(diff, n as u64)))
            }
            Metric::JaccardDistance => {
                let (inter, union) = jaccard_counts(a, b)?;
                if union == 0 {
                    return Ok(Some(exact::zero()));
                }
                Ok(Some(exact::ratio(union - inter, union)))
            }
            _ => Ok(None),
        }
    }
}

/// Metric-fairness parameters `(alpha, beta)` with `alpha >= 1`, `beta >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairnessParams {
    pub alpha: f64,
    pub beta: f64,
}

impl FairnessParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha {alpha} must be >= 1")));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidParameter(format!("beta {beta} must be >= 0")));
        }
        Ok(Self { alpha, beta })
    }

    /// `alpha * d + beta`.
    pub fn allowance(&self, d: f64) -> f64 {
        self.alpha * d + self.beta
    }
}
