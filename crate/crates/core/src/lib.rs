//! Derandomizing stochastic scorers into deterministic binary classifiers while
//! keeping individual (metric) fairness, plus exact and Monte Carlo auditing,
//! adversarial constructions and strategic-response analysis.

pub mod adversarial;
pub mod classifier;
pub mod data;
pub mod derandomize;
pub mod error;
pub mod exact;
pub mod hashing;
pub mod measure;
pub mod metric;
pub mod rng;
pub mod scorer;
pub mod strategic;

pub use classifier::{DeterministicClassifier, Rule};
pub use data::{Dataset, Point};
pub use derandomize::{
    default_bucketer, Bucketer, ClassifierFamily, Derandomizer, FamilyKind, FiniteFamily, LsDerandomizer,
    PiDerandomizer, RtDerandomizer,
};
pub use error::{Error, Result};
pub use hashing::{BitBudget, LshFamily, LshMember, PiFamily, PiHash};
pub use metric::{FairnessParams, Metric};
pub use rng::CountingRng;
pub use scorer::StochasticScorer;
