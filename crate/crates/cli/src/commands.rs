use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use fairderand::adversarial::{finite_family_violation_search, sphere_counterexample, DomainGrid, SphereConstruction};
use fairderand::exact;
use fairderand::measure::{
    aggregate_bias, aggregate_fairness_audit, aggregate_variance, bounds, empirical_fairness_curve,
    metric_fairness_check, scorer_fairness_check, threshold_fairness_check, CurveSource, EstimatorConfig,
    FairnessReport, Mode,
};
use fairderand::rng::{derive_seed, CountingRng};
use fairderand::strategic::{best_responses, Agent, CostFunction};
use fairderand::{
    Bucketer, ClassifierFamily, Dataset, Derandomizer, Error, FairnessParams, LshFamily, PiDerandomizer,
    StochasticScorer,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{AgentKind, ExperimentConfig, Scheme};
use crate::Failure;

const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Seed stream for sampled LSH members when estimating bucket mass.
const MASS_STREAM: u64 = 0xb0c4e7;

fn envelope(command: &str, config: &impl Serialize, result: Value) -> Value {
    json!({
        "command": command,
        "version": format!("fairderand {VERSION}"),
        "config": config,
        "result": result,
    })
}

fn out_file(dir: &Path, name: &str) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Other(format!("{}: {e}", dir.display())))?;
    Ok(dir.join(name))
}

fn write_json(dir: &Path, name: &str, v: &Value) -> Result<PathBuf, Failure> {
    let path = out_file(dir, name)?;
    let mut text = serde_json::to_string_pretty(v).map_err(|e| Failure::Other(e.to_string()))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn write_csv<S: Serialize>(dir: &Path, name: &str, rows: &[S]) -> Result<PathBuf, Failure> {
    let path = out_file(dir, name)?;
    let io = |e: csv::Error| Failure::Other(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(&path).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| Failure::Other(e.to_string()))?;
    Ok(path)
}

fn write_dataset(dir: &Path, name: &str, ds: &Dataset, scorer: &StochasticScorer) -> Result<PathBuf, Failure> {
    let path = out_file(dir, name)?;
    let file = std::fs::File::create(&path).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?;
    ds.write_csv(file, Some(scorer))?;
    Ok(path)
}

#[derive(Serialize)]
struct PredictionRow<'a> {
    id: &'a str,
    score: f64,
    prediction: u8,
}

pub fn derandomize(cfg: &ExperimentConfig, base: &Path) -> Result<Vec<PathBuf>, Failure> {
    let (ds, scorer) = cfg.scored_data(base)?;
    let family = cfg.family(&ds, scorer.clone())?;
    let mut rng = CountingRng::new(cfg.seed);
    let clf = family.sample(&mut rng)?;
    let preds = clf.predict_all(ds.points())?;
    let rows: Vec<PredictionRow> = ds
        .points()
        .iter()
        .zip(&preds)
        .map(|(p, &b)| {
            Ok(PredictionRow {
                id: &p.id,
                score: scorer.score(p)?,
                prediction: u8::from(b),
            })
        })
        .collect::<Result<_, Error>>()?;
    let result = json!({
        "seed": cfg.seed,
        "classifier": clf.params(),
        "bit_budget": clf.budget(),
        "predictions": rows,
    });
    let dir = cfg.out_dir();
    Ok(vec![
        write_json(&dir, "derandomize.json", &envelope("derandomize", cfg, result))?,
        write_csv(&dir, "predictions.csv", &rows)?,
    ])
}

/// Average over LSH members of the largest bucket's share of the dataset.
fn expected_max_bucket_mass(lsh: LshFamily, ds: &Dataset, est: &EstimatorConfig) -> Result<f64, Failure> {
    let members = match est.mode {
        Mode::Exact => lsh.enumerate()?,
        Mode::MonteCarlo { trials } => {
            let seed = derive_seed(est.seed, MASS_STREAM);
            (0..trials).map(|t| lsh.sample(&mut CountingRng::child(seed, t))).collect()
        }
    };
    let mut total = 0.0;
    for m in &members {
        let mut counts = vec![0usize; lsh.codomain_size() as usize];
        for p in ds.points() {
            counts[lsh.hash(m, p.fairness_view())? as usize] += 1;
        }
        total += *counts.iter().max().unwrap_or(&0) as f64 / ds.len() as f64;
    }
    Ok(total / members.len() as f64)
}

#[derive(Serialize)]
struct CurveRow {
    alpha: f64,
    scorer_beta: f64,
    family_beta: f64,
}

pub fn audit(cfg: &ExperimentConfig, base: &Path) -> Result<Vec<PathBuf>, Failure> {
    let (ds, scorer) = cfg.scored_data(base)?;
    let family = cfg.family(&ds, scorer.clone())?;
    let est = cfg.estimator();
    let metric = cfg.metric();
    let params = cfg.params();
    let k = cfg.k()?;
    let scores: Vec<f64> = ds.points().iter().map(|p| scorer.score(p)).collect::<Result<_, _>>()?;
    let e = scores.iter().map(|f| f * (1.0 - f)).sum::<f64>() / scores.len() as f64;

    let mut rep = FairnessReport::new();
    let (bias_bound, var_bound) = match &family {
        Derandomizer::Pi(pi) => {
            let mass = pi.bucketer().max_bucket_mass(&ds)?;
            rep.value("max_bucket_mass", mass);
            (bounds::pi_bias(k)?, bounds::pi_variance(mass, e, k)?)
        }
        Derandomizer::Rt(_) => (bounds::rt_bias(k)?, bounds::rt_variance(e)?),
        Derandomizer::Ls(ls) => {
            let mass = expected_max_bucket_mass(ls.lsh(), &ds, &est)?;
            rep.value("expected_max_bucket_mass", mass);
            (bounds::ls_bias(k)?, bounds::ls_variance(mass, e, k)?)
        }
    };
    rep.value("mean_f_one_minus_f", e);
    let bias = aggregate_bias(&family, &scorer, &ds, &est)?;
    rep.measured("aggregate_bias", &bias);
    rep.bounded("aggregate_bias_magnitude", &bias.abs(), bias_bound);
    rep.bounded("aggregate_variance", &aggregate_variance(&family, &ds, &est)?, var_bound);

    let mut scorer_rep = scorer_fairness_check(&scorer, &ds, &metric, &params, cfg.pairs_cap, cfg.seed)?;
    scorer_rep.pairs.clear();
    rep.absorb("scorer_fairness", scorer_rep);
    rep.absorb("metric_fairness", metric_fairness_check(&family, &ds, &metric, &params, &est)?);

    let aggregate_bound = match cfg.scheme()? {
        Scheme::Ls => bounds::ls_aggregate(params.alpha, params.beta, k, cfg.tau, cfg.delta)?,
        Scheme::Rt => bounds::pairwise_to_aggregate(params.alpha, params.beta + 1.0 / k as f64, cfg.tau, cfg.delta)?,
        Scheme::Pi => bounds::pairwise_to_aggregate(params.alpha, params.beta, cfg.tau, cfg.delta)?,
    };
    match aggregate_fairness_audit(&family, &ds, &metric, aggregate_bound, &est) {
        Ok(r) => rep.absorb("aggregate_fairness", r),
        Err(Error::EmptyPairSet(t)) => rep.note("aggregate_fairness", format!("no pairs within distance {t}")),
        Err(e) => return Err(e.into()),
    }
    if let Some(sigma) = cfg.sigma {
        rep.absorb(
            "threshold_fairness",
            threshold_fairness_check(&family, &ds, &metric, sigma, cfg.tau, &est)?,
        );
    }

    let dir = cfg.out_dir();
    let mut written = vec![];
    if let Some(alphas) = &cfg.alphas {
        let s = empirical_fairness_curve(CurveSource::Scorer(&scorer), &ds, &metric, alphas, &est)?;
        let f = empirical_fairness_curve(CurveSource::Family(&family), &ds, &metric, alphas, &est)?;
        let rows: Vec<CurveRow> = s
            .iter()
            .zip(&f)
            .map(|(&(alpha, scorer_beta), &(_, family_beta))| CurveRow {
                alpha,
                scorer_beta,
                family_beta,
            })
            .collect();
        written.push(write_csv(&dir, "curve.csv", &rows)?);
    }
    let result = json!({ "all_satisfied": rep.all_satisfied(), "report": rep });
    written.insert(0, write_json(&dir, "audit.json", &envelope("audit", cfg, result))?);
    Ok(written)
}

pub fn adversarial(cfg: &ExperimentConfig, _base: &Path) -> Result<Vec<PathBuf>, Failure> {
    if cfg.sphere.is_none() && cfg.search.is_none() {
        return Err(Failure::Config("adversarial needs a `sphere` or `search` section".into()));
    }
    let k = cfg.k()?;
    let params = cfg.params();
    let dir = cfg.out_dir();
    let mut written = vec![];
    let mut result = BTreeMap::new();

    if let Some(spec) = &cfg.sphere {
        let c = SphereConstruction::auto(spec.n_points, spec.dim, k, params.alpha, params.beta)?;
        let (ds, s) = sphere_counterexample(&c)?;
        written.push(write_dataset(&dir, "sphere.csv", &ds, &s)?);
        let fair = FairnessParams::new(1.0, 0.0)?;
        let mut scorer_rep = scorer_fairness_check(&s, &ds, &c.metric(), &fair, cfg.pairs_cap, cfg.seed)?;
        scorer_rep.pairs.clear();
        let pi = PiDerandomizer::new(Arc::new(s), Arc::new(Bucketer::identity(&ds)), k)?;
        let rep = metric_fairness_check(&pi, &ds, &c.metric(), &c.params(), &cfg.estimator())?;
        let floor = c.unfairness_floor();
        result.insert(
            "sphere",
            json!({
                "construction": c,
                "unfairness_floor": exact::to_f64(&floor),
                "unfairness_floor_exact": floor.to_string(),
                "pairs": spec.n_points * (spec.n_points - 1) / 2,
                "violating_pairs": rep.get("violations").map(|q| q.value),
                "scorer_fairness": scorer_rep,
                "family_fairness": rep,
            }),
        );
    }

    if let Some(spec) = &cfg.search {
        let scorer = Arc::new(StochasticScorer::affine(spec.weights.clone(), spec.bias)?);
        let rt = fairderand::RtDerandomizer::new(scorer.clone(), k)?;
        let members = rt.enumerate()?;
        let grid = DomainGrid::new(spec.lower.clone(), spec.upper.clone(), spec.step)?;
        let found = finite_family_violation_search(&members, &cfg.metric(), &grid, &params)?;
        if let Some(v) = &found {
            let ds = Dataset::new(vec![v.x.clone(), v.x_star.clone()])?;
            let pair_scores = StochasticScorer::tabular(
                ds.points()
                    .iter()
                    .map(|p| scorer.score(p).map(|f| (p.id.clone(), f)))
                    .collect::<Result<Vec<_>, _>>()?,
            )?;
            written.push(write_dataset(&dir, "violation.csv", &ds, &pair_scores)?);
        }
        result.insert(
            "search",
            json!({ "grid_points": grid.len() as u64, "family_size": members.len(), "violation": found }),
        );
    }

    written.insert(
        0,
        write_json(&dir, "adversarial.json", &envelope("adversarial", cfg, json!(result)))?,
    );
    Ok(written)
}

pub fn strategic(cfg: &ExperimentConfig, base: &Path) -> Result<Vec<PathBuf>, Failure> {
    let (ds, scorer) = cfg.scored_data(base)?;
    let cost = CostFunction::new(cfg.metric())?;
    let params = cfg.params();
    let est = cfg.estimator();
    let family;
    let agent = match cfg.agent {
        AgentKind::Scorer => Agent::Scorer(&scorer),
        AgentKind::Family => {
            family = cfg.family(&ds, scorer.clone())?;
            Agent::Family(&family, &est)
        }
    };
    let reports = best_responses(agent, &ds, &cost, &params)?;
    let rows: Vec<_> = reports.iter().map(|r| r.row()).collect();
    let max_gain = rows.iter().map(|r| r.gain).fold(f64::NEG_INFINITY, f64::max);
    let result = json!({
        "all_within_bound": rows.iter().all(|r| r.ok),
        "max_gain": max_gain,
        "bound_source": bounds::MANIPULATION,
        "responses": rows,
    });
    let dir = cfg.out_dir();
    Ok(vec![
        write_json(&dir, "strategic.json", &envelope("strategic", cfg, result))?,
        write_csv(&dir, "strategic.csv", &rows)?,
    ])
}

/// Evaluates one bound, or lists every bound with its inputs when `name` is absent.
pub fn bound(name: Option<&str>, inputs: &[String], out: Option<&Path>) -> Result<(Value, Option<PathBuf>), Failure> {
    let mut values = BTreeMap::new();
    for kv in inputs {
        let (key, raw) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("input `{kv}` is not key=value")))?;
        let v: f64 = raw
            .parse()
            .map_err(|_| Failure::Config(format!("input `{key}` is not a number: `{raw}`")))?;
        values.insert(key.to_string(), v);
    }
    let result = match name {
        None => json!(bounds::NAMES
            .iter()
            .map(|(n, keys)| (n.to_string(), keys.to_vec()))
            .collect::<BTreeMap<_, _>>()),
        Some(n) => json!({ "name": n, "bound": bounds::by_name(n, &values)? }),
    };
    let report = envelope("bounds", &json!({ "name": name, "inputs": values }), result);
    let path = match out {
        Some(dir) => Some(write_json(dir, "bounds.json", &report)?),
        None => None,
    };
    Ok((report, path))
}
