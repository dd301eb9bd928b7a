use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use super::{Bound, Measured};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub value: f64,
    /// Exact rational as `p/q`, present in exact mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_source: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub satisfied: Option<bool>,
}

impl Quantity {
    fn from_measured(m: &Measured) -> Self {
        Self {
            value: m.value(),
            exact: m.as_exact().map(|r| r.to_string()),
            stderr: m.stderr(),
            bound: None,
            bound_source: None,
            satisfied: None,
        }
    }
}

/// Verdict for one point pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairVerdict {
    pub a: String,
    pub b: String,
    pub distance: f64,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    pub allowance: f64,
    pub satisfied: bool,
}

/// Measured quantities next to their theoretical bounds.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FairnessReport {
    pub quantities: BTreeMap<String, Quantity>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<PairVerdict>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, Value>,
}

impl FairnessReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn measured(&mut self, name: &str, m: &Measured) {
        self.quantities.insert(name.to_string(), Quantity::from_measured(m));
    }

    pub fn count(&mut self, name: &str, n: u64) {
        self.value(name, n as f64);
    }

    /// A plain derived number with no exact form or error bar.
    pub fn value(&mut self, name: &str, v: f64) {
        self.quantities.insert(
            name.to_string(),
            Quantity {
                value: v,
                exact: None,
                stderr: None,
                bound: None,
                bound_source: None,
                satisfied: None,
            },
        );
    }

    /// Records `m` against `bound`, judged by [`Measured::at_most`].
    pub fn bounded(&mut self, name: &str, m: &Measured, bound: Bound) -> bool {
        let ok = m.at_most(bound.value);
        self.bounded_with(name, m, bound, ok);
        ok
    }

    /// Records `m` against `bound` with a verdict computed by the caller.
    pub fn bounded_with(&mut self, name: &str, m: &Measured, bound: Bound, satisfied: bool) {
        let mut q = Quantity::from_measured(m);
        q.bound = Some(bound.value);
        q.bound_source = Some(bound.source);
        q.satisfied = Some(satisfied);
        self.quantities.insert(name.to_string(), q);
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.meta.insert(key.to_string(), v);
    }

    pub fn get(&self, name: &str) -> Option<&Quantity> {
        self.quantities.get(name)
    }

    /// Whether every bounded quantity is satisfied.
    pub fn all_satisfied(&self) -> bool {
        self.quantities.values().all(|q| q.satisfied != Some(false))
    }

    /// Merges another report's entries under `prefix.`.
    pub fn absorb(&mut self, prefix: &str, other: FairnessReport) {
        for (k, v) in other.quantities {
            self.quantities.insert(format!("{prefix}.{k}"), v);
        }
        for (k, v) in other.meta {
            self.meta.insert(format!("{prefix}.{k}"), v);
        }
        self.pairs.extend(other.pairs);
    }
}
