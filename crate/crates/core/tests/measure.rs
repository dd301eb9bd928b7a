mod common;

use std::sync::Arc;

use common::*;
use fairderand::measure::{
    aggregate_bias, aggregate_fairness, aggregate_variance, bounds, candidate_pairs, empirical_fairness_curve,
    metric_fairness_check, pairwise_unfairness, pointwise_bias, pointwise_variance, threshold_fairness_check,
    CurveSource, EstimatorConfig, Measured,
};
use fairderand::rng::CountingRng;
use fairderand::{
    Bucketer, ClassifierFamily, Dataset, FairnessParams, LsDerandomizer, LshFamily, Metric, PiDerandomizer,
    RtDerandomizer,
};

fn within_sigma(est: &Measured, exact: &Measured) -> bool {
    let se = est.stderr().unwrap();
    (est.value() - exact.value()).abs() <= 4.0 * se + 1e-12
}

fn fixture() -> (Dataset, Vec<f64>) {
    let mut r = rng(11);
    let ds = binary_dataset(&mut r, 12, 5);
    let fs = (0..12).map(|_| decimal_score(&mut r).0).collect();
    (ds, fs)
}

#[test]
fn monte_carlo_agrees_with_exact() {
    let (ds, fs) = fixture();
    let s = tabular(&ds, &fs);
    let fams: Vec<Box<dyn ClassifierFamily>> = vec![
        Box::new(PiDerandomizer::new(s.clone(), Arc::new(Bucketer::identity(&ds)), 13).unwrap()),
        Box::new(RtDerandomizer::new(s.clone(), 9).unwrap()),
        Box::new(LsDerandomizer::new(s.clone(), LshFamily::BitSampling { n: 5 }, 7).unwrap()),
    ];
    let ex = EstimatorConfig::exact();
    let mc = EstimatorConfig::monte_carlo(20_000, 5);
    let (a, b) = (&ds.points()[0], &ds.points()[3]);
    for f in &fams {
        let f = f.as_ref();
        assert!(within_sigma(&aggregate_bias(f, &s, &ds, &mc).unwrap(), &aggregate_bias(f, &s, &ds, &ex).unwrap()));
        assert!(within_sigma(&aggregate_variance(f, &ds, &mc).unwrap(), &aggregate_variance(f, &ds, &ex).unwrap()));
        assert!(within_sigma(&pointwise_bias(f, &s, a, &mc).unwrap(), &pointwise_bias(f, &s, a, &ex).unwrap()));
        assert!(within_sigma(&pointwise_variance(f, a, &mc).unwrap(), &pointwise_variance(f, a, &ex).unwrap()));
        assert!(within_sigma(&pairwise_unfairness(f, a, b, &mc).unwrap(), &pairwise_unfairness(f, a, b, &ex).unwrap()));
    }
}

#[test]
fn aggregate_variance_matches_oracle() {
    let (ds, fs) = fixture();
    let qs: Vec<_> = fs.iter().map(|&f| decimal(f)).collect();
    let s = tabular(&ds, &fs);
    let rt = RtDerandomizer::new(s.clone(), 6).unwrap();
    let lib = aggregate_variance(&rt, &ds, &EstimatorConfig::exact()).unwrap();
    assert_eq!(lib.as_exact().unwrap(), &oracle_aggregate_variance(&oracle_rt_rows(6, &qs)));
    let pi = PiDerandomizer::new(s, Arc::new(Bucketer::identity(&ds)), 5).unwrap();
    let lib = aggregate_variance(&pi, &ds, &EstimatorConfig::exact()).unwrap();
    let rows = oracle_pi_rows(5, &(0..12).collect::<Vec<_>>(), 12, &qs);
    assert_eq!(lib.as_exact().unwrap(), &oracle_aggregate_variance(&rows));
}

#[test]
fn variance_bounds_hold() {
    let mut r = rng(12);
    for trial in 0..10 {
        let ds = line_dataset(16, 0.0625);
        let fs: Vec<f64> = (0..16).map(|_| decimal_score(&mut r).0).collect();
        let e = fs.iter().map(|f| f * (1.0 - f)).sum::<f64>() / 16.0;
        let s = tabular(&ds, &fs);
        let cfg = EstimatorConfig::exact();
        let k = [5u64, 7, 11][trial % 3];

        let grid = Bucketer::grid(&ds, 0.25).unwrap();
        let mass = grid.max_bucket_mass(&ds).unwrap();
        let pi = PiDerandomizer::new(s.clone(), Arc::new(grid), k).unwrap();
        let v = aggregate_variance(&pi, &ds, &cfg).unwrap();
        assert!(v.at_most(bounds::pi_variance(mass, e, k).unwrap().value), "pi {v}");

        let rt = RtDerandomizer::new(s.clone(), k).unwrap();
        let v = aggregate_variance(&rt, &ds, &cfg).unwrap();
        assert!(v.at_most(bounds::rt_variance(e).unwrap().value), "rt {v}");

        let bs = binary_dataset(&mut r, 16, 4);
        let ls = LsDerandomizer::new(tabular(&bs, &fs), LshFamily::BitSampling { n: 4 }, k).unwrap();
        // Expected largest bucket mass over the LSH draw.
        let mass = (0..4)
            .map(|c| {
                let ones = bs.points().iter().filter(|p| p.features[c] == 1.0).count();
                ones.max(16 - ones) as f64 / 16.0
            })
            .sum::<f64>()
            / 4.0;
        let v = aggregate_variance(&ls, &bs, &cfg).unwrap();
        assert!(v.at_most(bounds::ls_variance(mass, e, k).unwrap().value), "ls {v}");
    }
}

#[test]
fn rt_inherits_scorer_fairness_up_to_one_over_k() {
    let ds = line_dataset(30, 0.02);
    let fs: Vec<f64> = (0..30).map(|i| (100 + 17 * i) as f64 / 1000.0).collect();
    let s = tabular(&ds, &fs);
    let metric = Metric::ScaledEuclidean { scale: 1.0 };
    for k in [3u64, 10, 50] {
        let rt = RtDerandomizer::new(s.clone(), k).unwrap();
        let params = FairnessParams::new(1.0, bounds::rt_pairwise(1.0, 0.0, k, 0.0).unwrap().value).unwrap();
        let rep = metric_fairness_check(&rt, &ds, &metric, &params, &EstimatorConfig::exact()).unwrap();
        assert!(rep.all_satisfied(), "k={k}");
        assert_eq!(rep.get("violations").unwrap().value, 0.0);
    }
}

#[test]
fn ls_threshold_guarantee_holds() {
    let mut r = rng(13);
    let ds = binary_dataset(&mut r, 20, 10);
    let fs: Vec<f64> = ds.points().iter().map(|p| p.features.iter().sum::<f64>() / 10.0).collect();
    let ls = LsDerandomizer::new(tabular(&ds, &fs), LshFamily::BitSampling { n: 10 }, 41).unwrap();
    let metric = Metric::NormalizedHamming { n: 10 };
    let rep = threshold_fairness_check(&ls, &ds, &metric, 0.2, 0.6, &EstimatorConfig::exact()).unwrap();
    assert!(rep.meta.contains_key("guarantee"));
    assert!(rep.all_satisfied(), "{rep:?}");
}

#[test]
fn sampled_pairs_record_their_seed() {
    let ds = line_dataset(40, 0.01);
    let metric = Metric::ScaledEuclidean { scale: 1.0 };
    let all = candidate_pairs(&ds, &metric, usize::MAX, 3).unwrap();
    assert_eq!(all.len(), 40 * 39 / 2);
    assert!(!all.sampled());
    let some = candidate_pairs(&ds, &metric, 100, 3).unwrap();
    assert_eq!(some.len(), 100);
    assert_eq!(some.total, 780);
    assert!(some.sampling_seed.is_some());
    assert_eq!(some.pairs, candidate_pairs(&ds, &metric, 100, 3).unwrap().pairs);
}

#[test]
fn aggregate_fairness_counts_split_pairs() {
    let ds = line_dataset(4, 0.01);
    let clf = fairderand::DeterministicClassifier::table(
        ["p000", "p001", "p002", "p003"].iter().zip([true, true, false, false]).map(|(i, b)| (i.to_string(), b)),
    );
    let rho = aggregate_fairness(&clf, &ds, &Metric::ScaledEuclidean { scale: 1.0 }, 0.015).unwrap();
    // Close pairs are the 3 neighbours; only (1,2) is split.
    assert!((rho - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn fairness_curve_is_non_increasing() {
    let (ds, fs) = fixture();
    let s = tabular(&ds, &fs);
    let metric = Metric::NormalizedHamming { n: 5 };
    let alphas = [1.0, 1.5, 2.0, 4.0, 8.0];
    let cfg = EstimatorConfig::exact();
    let rt = RtDerandomizer::new(s.clone(), 10).unwrap();
    for curve in [
        empirical_fairness_curve(CurveSource::Scorer(&s), &ds, &metric, &alphas, &cfg).unwrap(),
        empirical_fairness_curve(CurveSource::Family(&rt), &ds, &metric, &alphas, &cfg).unwrap(),
    ] {
        assert!(curve.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-15));
    }
}

#[test]
fn monte_carlo_is_seed_deterministic() {
    let (ds, fs) = fixture();
    let s = tabular(&ds, &fs);
    let pi = PiDerandomizer::new(s.clone(), Arc::new(Bucketer::identity(&ds)), 101).unwrap();
    let cfg = EstimatorConfig::monte_carlo(500, 42);
    assert_eq!(aggregate_bias(&pi, &s, &ds, &cfg).unwrap(), aggregate_bias(&pi, &s, &ds, &cfg).unwrap());
    let first = pi.sample(&mut CountingRng::child(42, 0)).unwrap();
    assert_eq!(first, pi.sample(&mut CountingRng::child(42, 0)).unwrap());
}
