//! Closed-form theoretical bounds, each tagged with a descriptive source name.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bound {
    pub value: f64,
    pub source: &'static str,
}

pub const PI_BIAS: &str = "pairwise-independent derandomization bias bound";
pub const PI_VARIANCE: &str = "pairwise-independent derandomization variance bound";
pub const LS_BIAS: &str = "locality-sensitive derandomization bias bound";
pub const LS_VARIANCE: &str = "locality-sensitive derandomization variance bound";
pub const RT_BIAS: &str = "random-threshold bias bound";
pub const RT_VARIANCE: &str = "random-threshold variance bound";
pub const RT_PAIRWISE: &str = "random-threshold metric fairness";
pub const LS_PAIRWISE: &str = "locality-sensitive worst-case pairwise fairness";
pub const LS_AGGREGATE: &str = "locality-sensitive worst-case aggregate fairness";
pub const PAIRWISE_TO_AGGREGATE: &str = "pairwise-to-aggregate fairness bound";
pub const DECOMPOSITION: &str = "bias-variance decomposition bound";
pub const LS_THRESHOLD: &str = "locality-sensitive threshold-fairness guarantee";
pub const RT_THRESHOLD: &str = "random-threshold threshold-fairness guarantee";
pub const MANIPULATION: &str = "metric-fair manipulation-incentive bound";
pub const METRIC_FAIRNESS: &str = "metric fairness allowance";

fn check_k(k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    Ok(k as f64)
}

fn check_unit(v: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter(format!("{what} {v} is outside [0,1]")));
    }
    Ok(())
}

fn check_alpha_beta(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha >= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} must be >= 1")));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("beta {beta} must be >= 0")));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta {delta} is outside (0,1)")));
    }
    Ok(())
}

/// `1/k`.
pub fn pi_bias(k: u64) -> Result<Bound> {
    Ok(Bound { value: 1.0 / check_k(k)?, source: PI_BIAS })
}

/// `max_b Pr[pi(x) = b] * E[f(1-f)] + 1/k`.
pub fn pi_variance(max_bucket_mass: f64, mean_f_one_minus_f: f64, k: u64) -> Result<Bound> {
    check_unit(max_bucket_mass, "bucket mass")?;
    check_unit(mean_f_one_minus_f, "E[f(1-f)]")?;
    Ok(Bound {
        value: max_bucket_mass * mean_f_one_minus_f + 1.0 / check_k(k)?,
        source: PI_VARIANCE,
    })
}

/// `1/k`.
pub fn ls_bias(k: u64) -> Result<Bound> {
    Ok(Bound { value: 1.0 / check_k(k)?, source: LS_BIAS })
}

/// `E_h[max_b Pr[h(x) = b]] * E[f(1-f)] + 1/k`.
pub fn ls_variance(expected_max_bucket_mass: f64, mean_f_one_minus_f: f64, k: u64) -> Result<Bound> {
    check_unit(expected_max_bucket_mass, "bucket mass")?;
    check_unit(mean_f_one_minus_f, "E[f(1-f)]")?;
    Ok(Bound {
        value: expected_max_bucket_mass * mean_f_one_minus_f + 1.0 / check_k(k)?,
        source: LS_VARIANCE,
    })
}

/// `1/k` in general; zero when every score is a multiple of `1/k`.
pub fn rt_bias(k: u64) -> Result<Bound> {
    Ok(Bound { value: 1.0 / check_k(k)?, source: RT_BIAS })
}

/// `E[f(1-f)]`.
pub fn rt_variance(mean_f_one_minus_f: f64) -> Result<Bound> {
    check_unit(mean_f_one_minus_f, "E[f(1-f)]")?;
    Ok(Bound { value: mean_f_one_minus_f, source: RT_VARIANCE })
}

/// `alpha * d + beta + 1/k`.
pub fn rt_pairwise(alpha: f64, beta: f64, k: u64, d: f64) -> Result<Bound> {
    check_alpha_beta(alpha, beta)?;
    check_unit(d, "distance")?;
    Ok(Bound {
        value: alpha * d + beta + 1.0 / check_k(k)?,
        source: RT_PAIRWISE,
    })
}

/// `epsilon = 2/k` as used by the locality-sensitive bounds.
pub fn ls_epsilon(k: u64) -> Result<f64> {
    Ok(2.0 / check_k(k)?)
}

/// Centre of the exact locality-sensitive pairwise unfairness,
/// `|f - f'| + 2 f_lo (1 - f_hi) d`, with half-width `2/k`.
pub fn ls_pairwise_center(f: f64, f2: f64, d: f64) -> Result<f64> {
    check_unit(f, "score")?;
    check_unit(f2, "score")?;
    check_unit(d, "distance")?;
    let (lo, hi) = if f <= f2 { (f, f2) } else { (f2, f) };
    Ok(hi - lo + 2.0 * lo * (1.0 - hi) * d)
}

/// `(alpha + 1/2) d + beta + 2/k`.
pub fn ls_pairwise(alpha: f64, beta: f64, k: u64, d: f64) -> Result<Bound> {
    check_alpha_beta(alpha, beta)?;
    check_unit(d, "distance")?;
    Ok(Bound {
        value: (alpha + 0.5) * d + beta + ls_epsilon(k)?,
        source: LS_PAIRWISE,
    })
}

/// `(1 + 1/sqrt(delta)) (alpha tau + tau/2 + beta + 2/k)`.
pub fn ls_aggregate(alpha: f64, beta: f64, k: u64, tau: f64, delta: f64) -> Result<Bound> {
    check_alpha_beta(alpha, beta)?;
    check_unit(tau, "tau")?;
    check_delta(delta)?;
    Ok(Bound {
        value: (1.0 + 1.0 / delta.sqrt()) * (alpha * tau + tau / 2.0 + beta + ls_epsilon(k)?),
        source: LS_AGGREGATE,
    })
}

/// `(1 + 1/sqrt(delta)) (alpha tau + beta)`.
pub fn pairwise_to_aggregate(alpha: f64, beta: f64, tau: f64, delta: f64) -> Result<Bound> {
    check_alpha_beta(alpha, beta)?;
    check_unit(tau, "tau")?;
    check_delta(delta)?;
    Ok(Bound {
        value: (1.0 + 1.0 / delta.sqrt()) * (alpha * tau + beta),
        source: PAIRWISE_TO_AGGREGATE,
    })
}

/// `|bias| + 2 (Var_f + Var_fhat)^(2/3)`.
pub fn decomposition(bias: f64, scorer_variance: f64, family_variance: f64) -> Result<Bound> {
    if !(scorer_variance >= 0.0 && family_variance >= 0.0) {
        return Err(Error::InvalidParameter("variances must be >= 0".into()));
    }
    Ok(Bound {
        value: bias.abs() + 2.0 * (scorer_variance + family_variance).powf(2.0 / 3.0),
        source: DECOMPOSITION,
    })
}

/// `sigma + tau`, valid when `k >= 4 / sigma`.
pub fn ls_threshold(sigma: f64, tau: f64, k: u64) -> Result<Bound> {
    if !(sigma > 0.0 && sigma < 1.0 && tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidParameter("sigma and tau must lie in (0,1)".into()));
    }
    if (check_k(k)?) < 4.0 / sigma {
        return Err(Error::InvalidParameter(format!("k = {k} is below 4/sigma = {}", 4.0 / sigma)));
    }
    Ok(Bound { value: sigma + tau, source: LS_THRESHOLD })
}

/// `tau + 1/k`.
pub fn rt_threshold(tau: f64, k: u64) -> Result<Bound> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidParameter("tau must lie in (0,1)".into()));
    }
    Ok(Bound { value: tau + 1.0 / check_k(k)?, source: RT_THRESHOLD })
}

/// `(alpha - 1) c + beta`.
pub fn manipulation(alpha: f64, beta: f64, cost: f64) -> Result<Bound> {
    check_alpha_beta(alpha, beta)?;
    check_unit(cost, "cost")?;
    Ok(Bound {
        value: (alpha - 1.0) * cost + beta,
        source: MANIPULATION,
    })
}

/// Names accepted by [`by_name`] with their required inputs.
pub const NAMES: &[(&str, &[&str])] = &[
    ("pi-bias", &["k"]),
    ("pi-variance", &["max_bucket_mass", "mean_f_one_minus_f", "k"]),
    ("ls-bias", &["k"]),
    ("ls-variance", &["expected_max_bucket_mass", "mean_f_one_minus_f", "k"]),
    ("rt-bias", &["k"]),
    ("rt-variance", &["mean_f_one_minus_f"]),
    ("rt-pairwise", &["alpha", "beta", "k", "d"]),
    ("ls-pairwise", &["alpha", "beta", "k", "d"]),
    ("ls-aggregate", &["alpha", "beta", "k", "tau", "delta"]),
    ("pairwise-to-aggregate", &["alpha", "beta", "tau", "delta"]),
    ("decomposition", &["bias", "scorer_variance", "family_variance"]),
    ("ls-threshold", &["sigma", "tau", "k"]),
    ("rt-threshold", &["tau", "k"]),
    ("manipulation", &["alpha", "beta", "cost"]),
];

fn as_k(v: f64) -> Result<u64> {
    if v.fract() != 0.0 || v < 1.0 {
        return Err(Error::InvalidParameter(format!("k = {v} is not a positive integer")));
    }
    Ok(v as u64)
}

/// Evaluates a bound by name from named numeric inputs.
pub fn by_name(name: &str, inputs: &BTreeMap<String, f64>) -> Result<Bound> {
    let (_, keys) = NAMES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown bound `{name}`")))?;
    let mut v = Vec::with_capacity(keys.len());
    for key in keys.iter() {
        v.push(
            *inputs
                .get(*key)
                .ok_or_else(|| Error::InvalidParameter(format!("bound `{name}` needs input `{key}`")))?,
        );
    }
    match name {
        "pi-bias" => pi_bias(as_k(v[0])?),
        "pi-variance" => pi_variance(v[0], v[1], as_k(v[2])?),
        "ls-bias" => ls_bias(as_k(v[0])?),
        "ls-variance" => ls_variance(v[0], v[1], as_k(v[2])?),
        "rt-bias" => rt_bias(as_k(v[0])?),
        "rt-variance" => rt_variance(v[0]),
        "rt-pairwise" => rt_pairwise(v[0], v[1], as_k(v[2])?, v[3]),
        "ls-pairwise" => ls_pairwise(v[0], v[1], as_k(v[2])?, v[3]),
        "ls-aggregate" => ls_aggregate(v[0], v[1], as_k(v[2])?, v[3], v[4]),
        "pairwise-to-aggregate" => pairwise_to_aggregate(v[0], v[1], v[2], v[3]),
        "decomposition" => decomposition(v[0], v[1], v[2]),
        "ls-threshold" => ls_threshold(v[0], v[1], as_k(v[2])?),
        "rt-threshold" => rt_threshold(v[0], as_k(v[1])?),
        "manipulation" => manipulation(v[0], v[1], v[2]),
        _ => unreachable!("name listed in NAMES"),
    }
}
