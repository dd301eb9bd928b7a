use std::collections::HashMap;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::data::Point;
use crate::derandomize::Bucketer;
use crate::error::{Error, Result};
use crate::exact::meets_threshold;
use crate::hashing::{BitBudget, LshFamily, LshMember, PiFamily, PiHash};
use crate::scorer::StochasticScorer;

/// How a deterministic classifier turns a point into a bit.
#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    /// `1{f(x) >= h(pi(x)) / k}`.
    Pi {
        bucketer: Arc<Bucketer>,
        family: PiFamily,
        hash: PiHash,
    },
    /// `1{f(x) >= u / k}`.
    Rt { u: u64, k: u64 },
    /// `1{f(x) >= h_pi(h_ls(z)) / k}` where `z` is the point's fairness view.
    Ls {
        lsh: LshFamily,
        member: LshMember,
        family: PiFamily,
        hash: PiHash,
    },
    Table(Arc<HashMap<String, bool>>),
    Constant(bool),
}

/// A map `X -> {0,1}`; evaluation is a pure function of the point.
#[derive(Debug, Clone)]
pub struct DeterministicClassifier {
    scorer: Arc<StochasticScorer>,
    rule: Rule,
    budget: BitBudget,
}

impl PartialEq for DeterministicClassifier {
    fn eq(&self, other: &Self) -> bool {
        self.rule == other.rule && *self.scorer == *other.scorer
    }
}

impl DeterministicClassifier {
    pub(crate) fn new(scorer: Arc<StochasticScorer>, rule: Rule, budget: BitBudget) -> Self {
        Self { scorer, rule, budget }
    }

    pub fn constant(bit: bool) -> Self {
        Self::new(
            Arc::new(StochasticScorer::Constant(if bit { 1.0 } else { 0.0 })),
            Rule::Constant(bit),
            BitBudget::default(),
        )
    }

    /// `1{f(x) >= u/k}` for `u in 1..=k`.
    pub fn threshold(scorer: Arc<StochasticScorer>, u: u64, k: u64) -> Result<Self> {
        if k == 0 || u == 0 || u > k {
            return Err(Error::InvalidParameter(format!("threshold {u}/{k} is not in {{1/k..1}}")));
        }
        Ok(Self::new(scorer, Rule::Rt { u, k }, BitBudget::default()))
    }

    pub fn table(entries: impl IntoIterator<Item = (String, bool)>) -> Self {
        Self::new(
            Arc::new(StochasticScorer::Constant(0.0)),
            Rule::Table(Arc::new(entries.into_iter().collect())),
            BitBudget::default(),
        )
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn scorer(&self) -> &StochasticScorer {
        &self.scorer
    }

    pub fn budget(&self) -> BitBudget {
        self.budget
    }

    pub fn predict(&self, x: &Point) -> Result<bool> {
        match &self.rule {
            Rule::Pi { bucketer, family, hash } => {
                let h = family.eval(hash, bucketer.bucket(x)?)?;
                Ok(meets_threshold(self.scorer.score(x)?, h, family.k()))
            }
            Rule::Rt { u, k } => Ok(meets_threshold(self.scorer.score(x)?, *u, *k)),
            Rule::Ls { lsh, member, family, hash } => {
                let b = lsh.hash(member, x.fairness_view())?;
                let h = family.eval(hash, b)?;
                Ok(meets_threshold(self.scorer.score(x)?, h, family.k()))
            }
            Rule::Table(t) => t.get(&x.id).copied().ok_or_else(|| Error::UnknownPoint(x.id.clone())),
            Rule::Constant(b) => Ok(*b),
        }
    }

    pub fn predict_all(&self, points: &[Point]) -> Result<Vec<bool>> {
        points.iter().map(|p| self.predict(p)).collect()
    }

    /// Hash parameters for reports.
    pub fn params(&self) -> Value {
        match &self.rule {
            Rule::Pi { family, hash, .. } => json!({
                "scheme": "pi",
                "k": family.k(),
                "pi_hash": { "a": hash.a, "c": hash.c },
            }),
            Rule::Rt { u, k } => json!({ "scheme": "rt", "k": k, "u": u }),
            Rule::Ls { lsh, member, family, hash } => json!({
                "scheme": "ls",
                "k": family.k(),
                "lsh_family": lsh,
                "lsh_member": member,
                "pi_hash": { "a": hash.a, "c": hash.c },
            }),
            Rule::Table(t) => {
                let mut ids: Vec<_> = t.iter().collect();
                ids.sort();
                json!({ "scheme": "table", "entries": ids })
            }
            Rule::Constant(b) => json!({ "scheme": "constant", "value": b }),
        }
    }
}
