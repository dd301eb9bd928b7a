mod common;

use common::*;
use fairderand::measure::{bounds, metric_fairness_check, EstimatorConfig};
use fairderand::strategic::{best_response, best_responses, utility, Agent, CostFunction};
use fairderand::{Dataset, FairnessParams, Metric, Point, RtDerandomizer};
use rand::Rng;

fn plane(seed: u64, n: usize) -> Dataset {
    let mut r = rng(seed);
    Dataset::new(
        (0..n)
            .map(|i| Point::new(format!("x{i:02}"), vec![r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)]))
            .collect(),
    )
    .unwrap()
}

#[test]
fn family_gains_respect_family_fairness() {
    let ds = plane(1, 40);
    let metric = Metric::ScaledEuclidean { scale: 2f64.sqrt() };
    let cost = CostFunction::new(metric).unwrap();
    let fs: Vec<f64> = ds
        .points()
        .iter()
        .map(|p| ((0.2 + 0.5 * p.features[0]) * 1000.0).round() / 1000.0)
        .collect();
    let k = 20;
    let rt = RtDerandomizer::new(tabular(&ds, &fs), k).unwrap();
    let cfg = EstimatorConfig::exact();
    // Rounding to 3 decimals costs at most 1e-3 of Lipschitz slack.
    let beta = bounds::rt_pairwise(1.0, 1e-3, k, 0.0).unwrap().value;
    let params = FairnessParams::new(1.0, beta).unwrap();
    assert!(metric_fairness_check(&rt, &ds, &metric, &params, &cfg).unwrap().all_satisfied());
    for rep in best_responses(Agent::Family(&rt, &cfg), &ds, &cost, &params).unwrap() {
        assert!(rep.within_bound, "{rep:?}");
        assert!(rep.utility_gain >= 0.0);
        let m = bounds::manipulation(1.0, beta, 0.0).unwrap().value;
        assert!(rep.utility_gain <= m + 1e-9);
    }
}

#[test]
fn steep_scorer_exceeds_a_too_small_bound() {
    let ds = Dataset::new(vec![Point::new("a", vec![0.0, 0.0]), Point::new("b", vec![0.1, 0.0])]).unwrap();
    let s = tabular(&ds, &[0.0, 0.9]);
    let cost = CostFunction::new(Metric::ScaledEuclidean { scale: 1.0 }).unwrap();
    let params = FairnessParams::new(2.0, 0.0).unwrap();
    let rep = best_response(Agent::Scorer(&s), &ds.points()[0], &ds, &cost, &params).unwrap();
    assert_eq!(rep.best_response.id, "b");
    assert!((rep.utility_gain - 0.8).abs() < 1e-12);
    assert!(!rep.within_bound);
    assert_eq!(rep.row().response, "b");
}

#[test]
fn utility_is_score_minus_cost() {
    let ds = plane(2, 5);
    let s = tabular(&ds, &[0.1, 0.2, 0.3, 0.4, 0.5]);
    let metric = Metric::ScaledEuclidean { scale: 2.0 };
    let cost = CostFunction::new(metric).unwrap();
    let p = ds.points();
    for (i, a) in p.iter().enumerate() {
        for (j, b) in p.iter().enumerate() {
            let want = [0.1, 0.2, 0.3, 0.4, 0.5][j] - metric.eval(a, b).unwrap();
            assert!((utility(Agent::Scorer(&s), a, b, &cost).unwrap() - want).abs() < 1e-15, "{i}->{j}");
        }
    }
}

#[test]
fn ties_go_to_lowest_id() {
    let ds = Dataset::new(vec![
        Point::new("c", vec![0.0]),
        Point::new("a", vec![0.5]),
        Point::new("b", vec![-0.5]),
    ])
    .unwrap();
    let s = tabular(&ds, &[0.0, 0.9, 0.9]);
    let cost = CostFunction::new(Metric::ScaledEuclidean { scale: 1.0 }).unwrap();
    let params = FairnessParams::new(1.0, 0.5).unwrap();
    let rep = best_response(Agent::Scorer(&s), &ds.points()[0], &ds, &cost, &params).unwrap();
    assert_eq!(rep.best_response.id, "a");
}
