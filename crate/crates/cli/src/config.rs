use std::path::{Path, PathBuf};
use std::sync::Arc;

use fairderand::measure::{EstimatorConfig, DEFAULT_PAIRS_CAP};
use fairderand::{
    Bucketer, Dataset, Derandomizer, FairnessParams, LsDerandomizer, LshFamily, Metric, PiDerandomizer,
    RtDerandomizer, StochasticScorer,
};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Pi,
    Rt,
    Ls,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    #[default]
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    #[default]
    Scorer,
    Family,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereSpec {
    pub n_points: usize,
    #[serde(default = "two")]
    pub dim: usize,
}

/// Violation search over the random-threshold family of an affine scorer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub step: f64,
    pub weights: Vec<f64>,
    #[serde(default)]
    pub bias: f64,
}

fn two() -> usize {
    2
}
fn one() -> f64 {
    1.0
}
fn default_tau() -> f64 {
    0.05
}
fn default_delta() -> f64 {
    0.25
}
fn default_trials() -> u64 {
    1000
}
fn default_cap() -> usize {
    DEFAULT_PAIRS_CAP
}

/// One experiment: scheme, parameters, estimator settings and paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lsh: Option<LshFamily>,
    /// Grid bucketer resolution for the pairwise-independent scheme; one
    /// bucket per point when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Metric>,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub mode: ModeName,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub pairs_cap: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default)]
    pub agent: AgentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere: Option<SphereSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchSpec>,
}

/// Flag values that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub mode: Option<ModeName>,
    pub trials: Option<u64>,
    pub pairs_cap: Option<usize>,
}

fn bad(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

impl ExperimentConfig {
    pub fn load(path: &Path, flags: &Overrides) -> Result<(Self, PathBuf), Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        cfg.apply(flags);
        cfg.resolve()?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    fn apply(&mut self, flags: &Overrides) {
        if let Some(s) = flags.seed {
            self.seed = s;
        }
        if let Some(o) = &flags.out {
            self.out = Some(o.clone());
        }
        if let Some(m) = flags.mode {
            self.mode = m;
        }
        if let Some(t) = flags.trials {
            self.trials = t;
        }
        if let Some(c) = flags.pairs_cap {
            self.pairs_cap = c;
        }
    }

    /// Fills defaults that depend on other fields and checks every constraint.
    fn resolve(&mut self) -> Result<(), Failure> {
        if self.metric.is_none() {
            self.metric = Some(match (self.scheme, self.lsh) {
                (Some(Scheme::Ls), Some(lsh)) => lsh.paired_metric(),
                _ => Metric::ScaledEuclidean { scale: 1.0 },
            });
        }
        FairnessParams::new(self.alpha, self.beta)?;
        if let Some(m) = self.metric {
            m.validate()?;
        }
        if let Some(lsh) = self.lsh {
            lsh.validate()?;
        }
        if self.k == Some(0) {
            return Err(bad("k must be positive"));
        }
        if self.scheme.is_some() && self.k.is_none() {
            return Err(bad("a scheme needs k"));
        }
        if self.scheme == Some(Scheme::Ls) && self.lsh.is_none() {
            return Err(bad("the ls scheme needs an lsh family"));
        }
        if let Some(g) = self.resolution {
            if !(g.is_finite() && g > 0.0) {
                return Err(bad(format!("resolution {g} must be positive")));
            }
        }
        for (name, v) in [("tau", Some(self.tau)), ("delta", Some(self.delta)), ("sigma", self.sigma)] {
            if let Some(v) = v {
                if !(v > 0.0 && v < 1.0) {
                    return Err(bad(format!("{name} = {v} must lie in (0,1)")));
                }
            }
        }
        if self.mode == ModeName::Mc && self.trials < 2 {
            return Err(bad("monte carlo needs at least 2 trials"));
        }
        if self.pairs_cap == 0 {
            return Err(bad("pairs_cap must be positive"));
        }
        if let Some(a) = &self.alphas {
            if a.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(bad("alphas must be non-negative"));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> FairnessParams {
        FairnessParams {
            alpha: self.alpha,
            beta: self.beta,
        }
    }

    pub fn metric(&self) -> Metric {
        self.metric.unwrap_or(Metric::ScaledEuclidean { scale: 1.0 })
    }

    pub fn estimator(&self) -> EstimatorConfig {
        let base = match self.mode {
            ModeName::Exact => EstimatorConfig {
                seed: self.seed,
                ..EstimatorConfig::exact()
            },
            ModeName::Mc => EstimatorConfig::monte_carlo(self.trials, self.seed),
        };
        base.with_pair_threshold(self.tau)
            .with_confidence(self.delta)
            .with_pairs_cap(self.pairs_cap)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn k(&self) -> Result<u64, Failure> {
        self.k.ok_or_else(|| bad("k is required"))
    }

    pub fn scheme(&self) -> Result<Scheme, Failure> {
        self.scheme.ok_or_else(|| bad("scheme is required"))
    }

    /// Dataset and its score column; the scorer is mandatory.
    pub fn scored_data(&self, base: &Path) -> Result<(Dataset, Arc<StochasticScorer>), Failure> {
        let rel = self.data.as_ref().ok_or_else(|| bad("data path is required"))?;
        let path = if rel.is_absolute() { rel.clone() } else { base.join(rel) };
        let (ds, scorer) = Dataset::from_csv_path(&path)?;
        let scorer = scorer.ok_or_else(|| Failure::Data(format!("{}: missing column `score`", path.display())))?;
        Ok((ds, Arc::new(scorer)))
    }

    pub fn family(&self, ds: &Dataset, scorer: Arc<StochasticScorer>) -> Result<Derandomizer, Failure> {
        let k = self.k()?;
        Ok(match self.scheme()? {
            Scheme::Pi => {
                let bucketer = match self.resolution {
                    Some(g) => Bucketer::grid(ds, g)?,
                    None => Bucketer::identity(ds),
                };
                Derandomizer::Pi(PiDerandomizer::new(scorer, Arc::new(bucketer), k)?)
            }
            Scheme::Rt => Derandomizer::Rt(RtDerandomizer::new(scorer, k)?),
            Scheme::Ls => {
                let lsh = self.lsh.ok_or_else(|| bad("the ls scheme needs an lsh family"))?;
                Derandomizer::Ls(LsDerandomizer::new(scorer, lsh, k)?)
            }
        })
    }
}
