//! The three derandomization schemes.
//!
//! * pairwise-independent: `1{f(x) >= h_pi(bucket(x)) / k}`
//! * random threshold: `1{f(x) >= u / k}`, `u` uniform in `1..=k`
//! * LSH-composed: `1{f(x) >= h_pi(h_ls(x)) / k}`
//!
//! Each is a [`ClassifierFamily`]: a uniform distribution over deterministic
//! classifiers that can be sampled and, when finite and small, enumerated.

use std::collections::HashMap;
use std::sync::Arc;

use crate::classifier::{DeterministicClassifier, Rule};
use crate::data::{Dataset, Point};
use crate::error::{Error, Result};
use crate::hashing::{BitBudget, LshFamily, PiFamily, ENUMERATION_CAP};
use crate::rng::CountingRng;
use crate::scorer::StochasticScorer;

/// A uniform distribution over deterministic classifiers.
pub trait ClassifierFamily: Send + Sync {
    fn sample(&self, rng: &mut CountingRng) -> Result<DeterministicClassifier>;

    /// All members, each with equal weight.
    fn enumerate(&self) -> Result<Vec<DeterministicClassifier>>;

    /// Number of members, if finite.
    fn size(&self) -> Option<u128>;

    fn kind(&self) -> FamilyKind {
        FamilyKind::Other
    }
}

/// Which construction a family comes from, for choosing theoretical bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Pi { k: u64 },
    Rt { k: u64 },
    Ls { k: u64, lsh: LshFamily },
    Other,
}

/// Fixed discretization `pi: X -> B`, with `B` indexed `0..len`.
#[derive(Debug, Clone, PartialEq)]
pub enum Bucketer {
    /// Cell `floor(x_i / resolution)` per coordinate; `B` is the set of cells
    /// realized on the dataset, indexed in order of first appearance.
    GridQuantize {
        resolution: f64,
        cells: HashMap<Vec<i64>, u64>,
    },
    /// One bucket per point id.
    Identity { ids: HashMap<String, u64> },
}

impl Bucketer {
    pub fn grid(dataset: &Dataset, resolution: f64) -> Result<Self> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid resolution {resolution} must be positive"
            )));
        }
        let mut cells = HashMap::new();
        for p in dataset.points() {
            let cell = grid_cell(&p.features, resolution);
            let next = cells.len() as u64;
            cells.entry(cell).or_insert(next);
        }
        Ok(Bucketer::GridQuantize { resolution, cells })
    }

    pub fn identity(dataset: &Dataset) -> Self {
        let ids = dataset
            .points()
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id.clone(), i as u64))
            .collect();
        Bucketer::Identity { ids }
    }

    /// `|B|`.
    pub fn len(&self) -> u64 {
        match self {
            Bucketer::GridQuantize { cells, .. } => cells.len() as u64,
            Bucketer::Identity { ids } => ids.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bucket(&self, x: &Point) -> Result<u64> {
        match self {
            Bucketer::GridQuantize { resolution, cells } => cells
                .get(&grid_cell(&x.features, *resolution))
                .copied()
                .ok_or_else(|| Error::UnknownBucket(x.id.clone())),
            Bucketer::Identity { ids } => {
                ids.get(&x.id).copied().ok_or_else(|| Error::UnknownBucket(x.id.clone()))
            }
        }
    }

    /// Largest fraction of the dataset sharing one bucket.
    pub fn max_bucket_mass(&self, dataset: &Dataset) -> Result<f64> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut counts = vec![0usize; self.len() as usize];
        for p in dataset.points() {
            counts[self.bucket(p)? as usize] += 1;
        }
        Ok(*counts.iter().max().unwrap_or(&0) as f64 / dataset.len() as f64)
    }
}

fn grid_cell(features: &[f64], resolution: f64) -> Vec<i64> {
    features.iter().map(|v| (v / resolution).floor() as i64).collect()
}

/// Grid bucketer at resolution `g` over the dataset's realized cells.
pub fn default_bucketer(dataset: &Dataset, g: f64) -> Result<Bucketer> {
    Bucketer::grid(dataset, g)
}

#[derive(Debug, Clone)]
pub struct PiDerandomizer {
    scorer: Arc<StochasticScorer>,
    bucketer: Arc<Bucketer>,
    family: PiFamily,
}

impl PiDerandomizer {
    pub fn new(scorer: Arc<StochasticScorer>, bucketer: Arc<Bucketer>, k: u64) -> Result<Self> {
        if bucketer.is_empty() {
            return Err(Error::InvalidParameter("bucketer has no buckets".into()));
        }
        let family = PiFamily::new(k, bucketer.len())?;
        Ok(Self { scorer, bucketer, family })
    }

    pub fn k(&self) -> u64 {
        self.family.k()
    }

    pub fn family(&self) -> &PiFamily {
        &self.family
    }

    pub fn bucketer(&self) -> &Bucketer {
        &self.bucketer
    }

    pub fn scorer(&self) -> &StochasticScorer {
        &self.scorer
    }

    fn build(&self, hash: crate::hashing::PiHash, budget: BitBudget) -> DeterministicClassifier {
        DeterministicClassifier::new(
            self.scorer.clone(),
            Rule::Pi {
                bucketer: self.bucketer.clone(),
                family: self.family,
                hash,
            },
            budget,
        )
    }
}

impl ClassifierFamily for PiDerandomizer {
    fn sample(&self, rng: &mut CountingRng) -> Result<DeterministicClassifier> {
        let before = rng.bits_consumed();
        let hash = self.family.sample(rng);
        Ok(self.build(hash, BitBudget::new(rng.bits_consumed() - before, 0)))
    }

    fn enumerate(&self) -> Result<Vec<DeterministicClassifier>> {
        Ok(self
            .family
            .enumerate()?
            .into_iter()
            .map(|h| self.build(h, BitBudget::default()))
            .collect())
    }

    fn size(&self) -> Option<u128> {
        Some(self.family.size())
    }

    fn kind(&self) -> FamilyKind {
        FamilyKind::Pi { k: self.k() }
    }
}

#[derive(Debug, Clone)]
pub struct RtDerandomizer {
    scorer: Arc<StochasticScorer>,
    k: u64,
}

impl RtDerandomizer {
    /// Thresholds on the grid `{1/k, .., k/k}`.
    pub fn new(scorer: Arc<StochasticScorer>, k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("threshold precision k must be >= 1".into()));
        }
        Ok(Self { scorer, k })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn scorer(&self) -> &StochasticScorer {
        &self.scorer
    }
}

impl ClassifierFamily for RtDerandomizer {
    fn sample(&self, rng: &mut CountingRng) -> Result<DeterministicClassifier> {
        let before = rng.bits_consumed();
        let u = rng.uniform_below(self.k) + 1;
        let budget = BitBudget::new(rng.bits_consumed() - before, 0);
        Ok(DeterministicClassifier::new(self.scorer.clone(), Rule::Rt { u, k: self.k }, budget))
    }

    fn enumerate(&self) -> Result<Vec<DeterministicClassifier>> {
        if self.k as u128 > ENUMERATION_CAP {
            return Err(Error::FamilyTooLarge {
                size: self.k as u128,
                cap: ENUMERATION_CAP,
            });
        }
        Ok((1..=self.k)
            .map(|u| {
                DeterministicClassifier::new(self.scorer.clone(), Rule::Rt { u, k: self.k }, BitBudget::default())
            })
            .collect())
    }

    fn size(&self) -> Option<u128> {
        Some(self.k as u128)
    }

    fn kind(&self) -> FamilyKind {
        FamilyKind::Rt { k: self.k }
    }
}

#[derive(Debug, Clone)]
pub struct LsDerandomizer {
    scorer: Arc<StochasticScorer>,
    lsh: LshFamily,
    family: PiFamily,
}

impl LsDerandomizer {
    /// The LSH family hashes each point's fairness view (its fairness features
    /// when present), while the scorer reads the inference features.
    pub fn new(scorer: Arc<StochasticScorer>, lsh: LshFamily, k: u64) -> Result<Self> {
        lsh.validate()?;
        let family = PiFamily::new(k, lsh.codomain_size())?;
        Ok(Self { scorer, lsh, family })
    }

    pub fn k(&self) -> u64 {
        self.family.k()
    }

    pub fn lsh(&self) -> LshFamily {
        self.lsh
    }

    pub fn family(&self) -> &PiFamily {
        &self.family
    }

    pub fn scorer(&self) -> &StochasticScorer {
        &self.scorer
    }
}

impl ClassifierFamily for LsDerandomizer {
    fn sample(&self, rng: &mut CountingRng) -> Result<DeterministicClassifier> {
        let start = rng.bits_consumed();
        let member = self.lsh.sample(rng);
        let mid = rng.bits_consumed();
        let hash = self.family.sample(rng);
        let budget = BitBudget::new(rng.bits_consumed() - mid, mid - start);
        Ok(DeterministicClassifier::new(
            self.scorer.clone(),
            Rule::Ls {
                lsh: self.lsh,
                member,
                family: self.family,
                hash,
            },
            budget,
        ))
    }

    fn enumerate(&self) -> Result<Vec<DeterministicClassifier>> {
        let lsh_size = self
            .lsh
            .size()
            .ok_or_else(|| Error::NotEnumerable("simhash has a continuous family".into()))?;
        let size = lsh_size.saturating_mul(self.family.size());
        if size > ENUMERATION_CAP {
            return Err(Error::FamilyTooLarge { size, cap: ENUMERATION_CAP });
        }
        let members = self.lsh.enumerate()?;
        let hashes = self.family.enumerate()?;
        let mut out = Vec::with_capacity(size as usize);
        for m in &members {
            for h in &hashes {
                out.push(DeterministicClassifier::new(
                    self.scorer.clone(),
                    Rule::Ls {
                        lsh: self.lsh,
                        member: m.clone(),
                        family: self.family,
                        hash: h.clone(),
                    },
                    BitBudget::default(),
                ));
            }
        }
        Ok(out)
    }

    fn size(&self) -> Option<u128> {
        self.lsh.size().map(|s| s.saturating_mul(self.family.size()))
    }

    fn kind(&self) -> FamilyKind {
        FamilyKind::Ls { k: self.k(), lsh: self.lsh }
    }
}

/// Any finite list of classifiers, sampled uniformly.
#[derive(Debug, Clone)]
pub struct FiniteFamily(pub Vec<DeterministicClassifier>);

impl ClassifierFamily for FiniteFamily {
    fn sample(&self, rng: &mut CountingRng) -> Result<DeterministicClassifier> {
        if self.0.is_empty() {
            return Err(Error::InvalidParameter("empty family".into()));
        }
        Ok(self.0[rng.uniform_below(self.0.len() as u64) as usize].clone())
    }

    fn enumerate(&self) -> Result<Vec<DeterministicClassifier>> {
        Ok(self.0.clone())
    }

    fn size(&self) -> Option<u128> {
        Some(self.0.len() as u128)
    }
}

/// One of the three schemes, chosen at run time.
#[derive(Debug, Clone)]
pub enum Derandomizer {
    Pi(PiDerandomizer),
    Rt(RtDerandomizer),
    Ls(LsDerandomizer),
}

impl Derandomizer {
    pub fn k(&self) -> u64 {
        match self {
            Derandomizer::Pi(d) => d.k(),
            Derandomizer::Rt(d) => d.k(),
            Derandomizer::Ls(d) => d.k(),
        }
    }

    pub fn scorer(&self) -> &StochasticScorer {
        match self {
            Derandomizer::Pi(d) => d.scorer(),
            Derandomizer::Rt(d) => d.scorer(),
            Derandomizer::Ls(d) => d.scorer(),
        }
    }

    pub fn scheme_name(&self) -> &'static str {
        match self {
            Derandomizer::Pi(_) => "pi",
            Derandomizer::Rt(_) => "rt",
            Derandomizer::Ls(_) => "ls",
        }
    }

    fn inner(&self) -> &dyn ClassifierFamily {
        match self {
            Derandomizer::Pi(d) => d,
            Derandomizer::Rt(d) => d,
            Derandomizer::Ls(d) => d,
        }
    }
}

impl ClassifierFamily for Derandomizer {
    fn sample(&self, rng: &mut CountingRng) -> Result<DeterministicClassifier> {
        self.inner().sample(rng)
    }

    fn enumerate(&self) -> Result<Vec<DeterministicClassifier>> {
        self.inner().enumerate()
    }

    fn size(&self) -> Option<u128> {
        self.inner().size()
    }

    fn kind(&self) -> FamilyKind {
        self.inner().kind()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact;

    fn pt(id: &str, f: &[f64]) -> Point {
        Point::new(id, f.to_vec())
    }

    fn constant(c: f64) -> Arc<StochasticScorer> {
        Arc::new(StochasticScorer::constant(c).unwrap())
    }

    fn family_mean(fam: &dyn ClassifierFamily, x: &Point) -> num_rational::BigRational {
        let members = fam.enumerate().unwrap();
        let ones = members.iter().filter(|c| c.predict(x).unwrap()).count();
        exact::ratio(ones as u64, members.len() as u64)
    }

    #[test]
    fn grid_bucketer_examples() {
        let ds = Dataset::new(vec![pt("a", &[0.2, 0.3]), pt("b", &[0.4, 0.9])]).unwrap();
        let coarse = default_bucketer(&ds, 1.0).unwrap();
        assert_eq!(coarse.bucket(&ds.points()[0]), coarse.bucket(&ds.points()[1]));
        let fine = default_bucketer(&ds, 0.5).unwrap();
        assert_ne!(fine.bucket(&ds.points()[0]), fine.bucket(&ds.points()[1]));
        let tiny = default_bucketer(&ds, 0.01).unwrap();
        assert_eq!(tiny.len(), 2);
        assert!(matches!(tiny.bucket(&pt("z", &[5.0, 5.0])), Err(Error::UnknownBucket(_))));
    }

    #[test]
    fn pi_constant_scores() {
        let ds = Dataset::new(vec![pt("a", &[0.2]), pt("b", &[0.7])]).unwrap();
        let bucketer = Arc::new(Bucketer::identity(&ds));
        for (c, want) in [(1.0, true), (0.0, false)] {
            let d = PiDerandomizer::new(constant(c), bucketer.clone(), 5).unwrap();
            let mut rng = CountingRng::new(3);
            for _ in 0..20 {
                let clf = d.sample(&mut rng).unwrap();
                assert!(ds.points().iter().all(|p| clf.predict(p).unwrap() == want));
            }
        }
    }

    #[test]
    fn pi_half_score_mean() {
        let ds = Dataset::new(vec![pt("a", &[0.2]), pt("b", &[0.7])]).unwrap();
        let d = PiDerandomizer::new(constant(0.5), Arc::new(Bucketer::identity(&ds)), 5).unwrap();
        assert_eq!(d.enumerate().unwrap().len(), 25);
        assert_eq!(family_mean(&d, &ds.points()[0]), exact::ratio(2, 5));
    }

    #[test]
    fn rt_examples() {
        let x = pt("x", &[0.0]);
        let d = RtDerandomizer::new(constant(0.3), 10).unwrap();
        assert_eq!(d.enumerate().unwrap().len(), 10);
        assert_eq!(family_mean(&d, &x), exact::ratio(3, 10));
        let d = RtDerandomizer::new(constant(0.25), 10).unwrap();
        assert_eq!(family_mean(&d, &x), exact::ratio(2, 10));
        let top = DeterministicClassifier::threshold(constant(0.99), 10, 10).unwrap();
        assert!(!top.predict(&x).unwrap());
        let top = DeterministicClassifier::threshold(constant(1.0), 10, 10).unwrap();
        assert!(top.predict(&x).unwrap());
    }

    #[test]
    fn rt_monotone_in_threshold() {
        let s = Arc::new(StochasticScorer::affine(vec![1.0], 0.0).unwrap());
        let k = 12;
        for i in 0..=40 {
            let x = pt("x", &[i as f64 / 40.0]);
            for u in 1..=k {
                for u2 in u..=k {
                    let lo = DeterministicClassifier::threshold(s.clone(), u, k).unwrap();
                    let hi = DeterministicClassifier::threshold(s.clone(), u2, k).unwrap();
                    assert!(hi.predict(&x).unwrap() <= lo.predict(&x).unwrap());
                }
            }
        }
    }

    #[test]
    fn ls_small_enumeration() {
        let x1 = pt("x1", &[0.0, 0.0]);
        let scorer = Arc::new(StochasticScorer::tabular(vec![("x1".to_string(), 0.2)]).unwrap());
        let d = LsDerandomizer::new(scorer, LshFamily::BitSampling { n: 2 }, 5).unwrap();
        assert_eq!(d.enumerate().unwrap().len(), 50);
        assert_eq!(family_mean(&d, &x1), exact::ratio(1, 5));
    }

    #[test]
    fn ls_constant_one() {
        let d = LsDerandomizer::new(constant(1.0), LshFamily::SimHash { dim: 3 }, 7).unwrap();
        let mut rng = CountingRng::new(1);
        let clf = d.sample(&mut rng).unwrap();
        assert!(clf.predict(&pt("a", &[0.3, -1.0, 2.0])).unwrap());
        assert!(matches!(d.enumerate(), Err(Error::NotEnumerable(_))));
    }

    #[test]
    fn seeded_samples_replay() {
        let d = LsDerandomizer::new(constant(0.4), LshFamily::MinHash { universe: 4 }, 7).unwrap();
        let a = d.sample(&mut CountingRng::new(42)).unwrap();
        let b = d.sample(&mut CountingRng::new(42)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.budget(), b.budget());
        assert_eq!(a.budget().total, a.budget().pi_bits + a.budget().lsh_bits);
    }

    #[test]
    fn enumeration_sizes() {
        let ds = Dataset::new(vec![pt("a", &[0.0]), pt("b", &[1.0]), pt("c", &[2.0])]).unwrap();
        let d = PiDerandomizer::new(constant(0.5), Arc::new(Bucketer::identity(&ds)), 3).unwrap();
        assert_eq!(d.enumerate().unwrap().len(), 9);
    }
}
