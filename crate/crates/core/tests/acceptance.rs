//! Acceptance criteria 1–10. Runs as a plain binary: one PASS/FAIL line per
//! criterion, non-zero exit if any fails. Pass criterion numbers as
//! arguments to run a subset.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use mcboost::compression::compression_size;
use mcboost::domain::{Dataset, Instance, Label, LabeledExample, ListFunction, ListId, RandomStream};
use mcboost::harness::{
    self, counterexample, gen_data, DataSource, ExperimentConfig, GenSpec, LearnerDescriptor, ListLearnerDescriptor,
    Model, PipelineConfig, PlantedParams,
};
use mcboost::hedge::{default_eta, eliminate_min_label, run_hedge, EdgeAudit, HedgeRun};
use mcboost::hint::build_initial_hint;
use mcboost::listlearn::{
    list_to_weak, weak_to_list, ListBoostConfig, ListToWeakParams, PlantedListLearner, WeakToListParams,
};
use mcboost::oig::{
    build_oig, find_orientation, k_list_pac_learn, kds_dimension, FiniteClass, ListPacParams, OneInclusionLearner,
    OrientationStrategy,
};
use mcboost::recursive::{recursive_boost, BoostConfig};
use mcboost::weak_learn::{
    CalibratedOracle, Classifier, Erm, MemorizingOracle, TableClassifier, TooWeak, WeakLearnerSpec,
};
use rand::seq::SliceRandom;
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// Regret checks collected from criteria 1 and 2 for criterion 3.
#[derive(Default)]
struct RegretTally {
    runs: usize,
    held: usize,
}

impl RegretTally {
    fn add(&mut self, run: &HedgeRun<f64>, ds: &Dataset) {
        self.runs += 1;
        if regret_holds(run, ds) {
            self.held += 1;
        }
    }
}

/// `Σ α_t ≤ ln m/η + ηT + H(x_i, y_i)` for every i, relative tolerance
/// 1e-6, recomputed from the raw trace.
fn regret_holds(run: &HedgeRun<f64>, ds: &Dataset) -> bool {
    let t = run.scores.rounds() as f64;
    let eta = run.state.eta();
    let spent: f64 = run.state.alphas().iter().sum();
    let m = ds.len().max(2) as f64;
    (0..ds.len()).all(|i| {
        let rhs = m.ln() / eta + eta * t + run.scores.score_train(i, ds.label(i)) as f64;
        spent <= rhs + 1e-6 * spent.abs().max(1.0)
    })
}

fn keyed(m: usize, labels: usize, rng: &mut RandomStream) -> Dataset {
    let ex = (0..m)
        .map(|i| LabeledExample::new(Instance::key(format!("x{i}")), Label(rng.gen_range(0..labels as u32))))
        .collect();
    Dataset::new(ex, labels).unwrap()
}

fn truth(ds: &Dataset) -> Arc<dyn Classifier> {
    let t: HashMap<Instance, Label> = ds.examples().iter().map(|e| (e.instance.clone(), e.label)).collect();
    Arc::new(TableClassifier::new(t, Label(0)))
}

// 1. Counterexample.
fn criterion_1(tally: &mut RegretTally) -> Verdict {
    let start = Instant::now();
    let ds = counterexample([1, 1, 1]).unwrap();
    let spec = WeakLearnerSpec::new(Arc::new(TooWeak), 3).unwrap();
    let mu = ListFunction::universal(3);
    let all: Vec<Label> = ds.alphabet().labels().collect();
    let mut notes = Vec::new();
    let mut ok = true;
    for t in [10, 100, 1000] {
        let run = run_hedge(
            &ds,
            &mu,
            &spec,
            t,
            default_eta(3, t),
            &RandomStream::new(t as u64),
            None,
        )
        .unwrap();
        tally.add(&run, &ds);
        let hits = ds
            .examples()
            .iter()
            .filter(|e| {
                let votes: Vec<(Label, u32)> = run.scores.scores(&e.instance);
                let best = votes
                    .iter()
                    .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                    .map(|v| v.0);
                best == Some(e.label)
            })
            .count();
        // Exact rational comparison: hits / 3 ≤ 2 / 3.
        let plurality_ok = hits * 3 <= 2 * ds.len();
        let elim_ok = ds
            .examples()
            .iter()
            .all(|e| eliminate_min_label(&run.scores, &e.instance, &all).unwrap() != e.label);
        ok &= plurality_ok && elim_ok;
        notes.push(format!(
            "T={t}: plurality {hits}/3, elimination {}",
            if elim_ok { "ok" } else { "WRONG" }
        ));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(1);
    verdict(ok, format!("{}; {:.3}s", notes.join("; "), elapsed.as_secs_f64()))
}

// 2. Hedge vote margin with a calibrated BRG oracle.
fn criterion_2(tally: &mut RegretTally) -> Verdict {
    let gammas = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3];
    let (mut worst, mut failed, mut audited_fail) = (f64::INFINITY, 0, 0);
    for s in 0..50u64 {
        let mut rng = RandomStream::new(1000 + s);
        let m = rng.gen_range(20..=200);
        let k = 2 + (s as usize % 5);
        let labels = k + (s as usize % 3);
        let gamma = gammas[(s as usize / 5) % gammas.len()];
        let ds = keyed(m, labels, &mut rng);
        let table: HashMap<Instance, Vec<Label>> = ds
            .examples()
            .iter()
            .map(|e| {
                let mut others: Vec<Label> = (0..labels as u32).map(Label).filter(|&l| l != e.label).collect();
                others.shuffle(&mut rng);
                let mut list: Vec<Label> = others.into_iter().take(k - 1).collect();
                list.push(e.label);
                list.shuffle(&mut rng);
                (e.instance.clone(), list)
            })
            .collect();
        let mu = ListFunction::explicit(ListId::new("hint"), k, table).unwrap();
        let t = (8.0 * (m as f64).ln() / (gamma * gamma)).ceil() as usize;
        let eta = ((m as f64).ln() / (2.0 * t as f64)).sqrt();
        let spec = WeakLearnerSpec::new(Arc::new(CalibratedOracle::new(gamma).unwrap()), 1).unwrap();
        let run = run_hedge(
            &ds,
            &mu,
            &spec,
            t,
            eta,
            &RandomStream::new(s),
            Some(EdgeAudit::brg(k, gamma)),
        )
        .unwrap();
        tally.add(&run, &ds);
        if !run.audits.all_passed() {
            audited_fail += 1;
            continue;
        }
        let need = 1.0 / k as f64 + gamma / 2.0 - 1e-9;
        for i in 0..m {
            let frac = run.scores.score_train(i, ds.label(i)) as f64 / t as f64;
            worst = worst.min(frac - (need + 1e-9));
            if frac < need {
                failed += 1;
            }
        }
    }
    verdict(
        failed == 0 && audited_fail == 0,
        format!(
            "50 instances, {audited_fail} with audit failures, {failed} pairs below 1/k + γ/2; min slack {worst:.4}"
        ),
    )
}

fn criterion_3(tally: &RegretTally) -> Verdict {
    verdict(
        tally.runs > 0 && tally.held == tally.runs,
        format!("regret inequality held on {}/{} runs", tally.held, tally.runs),
    )
}

fn planted(seed: u64, m: usize, labels: usize, universe: usize, class_size: usize) -> harness::Generated {
    let spec = GenSpec::Planted(PlantedParams {
        m,
        labels,
        universe,
        class_size,
        ..Default::default()
    });
    gen_data(&spec, &RandomStream::new(seed)).unwrap()
}

// 4. Initial hint.
fn criterion_4() -> Verdict {
    let gammas = [0.1, 0.2, 0.3, 0.4];
    let (mut audited, mut bad) = (0, 0);
    for s in 0..30u64 {
        let mut r = RandomStream::new(4000 + s);
        let m = r.gen_range(30..=300);
        let labels = r.gen_range(2..=16);
        let gamma = gammas[s as usize % 4];
        let ds = planted(s, m, labels, 40, 24).train;
        let p = ((m as f64).ln() / gamma).ceil() as usize;
        let spec = WeakLearnerSpec::new(Arc::new(CalibratedOracle::new(gamma).unwrap()), 1).unwrap();
        let h = build_initial_hint(&ds, &spec, p, &RandomStream::new(s), Some(gamma)).unwrap();
        if !h.audits.all_passed() {
            continue;
        }
        audited += 1;
        let covered = ds.examples().iter().all(|e| h.list.contains(&e.instance, e.label));
        if !(h.residual.is_empty() && covered && h.hypotheses.len() <= p) {
            bad += 1;
        }
    }
    verdict(
        audited == 30 && bad == 0,
        format!("{audited}/30 seeds fully audited, {bad} with a non-empty residual or uncovered pair"),
    )
}

// 5. Consistency and exact compression size.
fn criterion_5() -> Verdict {
    let (mut audited, mut inconsistent, mut size_mismatch, mut runs) = (0, 0, 0, 0);
    let mut sizes = Vec::new();
    for s in 0..12u64 {
        let mut r = RandomStream::new(5000 + s);
        let m = r.gen_range(50..=400);
        let labels = r.gen_range(2..=16);
        let g = planted(100 + s, m, labels, 40, 32);
        let ds = &g.train;
        let (spec, gamma) = if s % 4 == 3 {
            let erm = Erm::new(Arc::new(g.class.clone().unwrap())).unwrap();
            (WeakLearnerSpec::new(Arc::new(erm), 12).unwrap(), 0.3)
        } else {
            let gamma = [0.2, 0.3, 0.25][s as usize % 3];
            (
                WeakLearnerSpec::new(Arc::new(CalibratedOracle::new(gamma).unwrap()), 4).unwrap(),
                gamma,
            )
        };
        let config = BoostConfig::for_sample(m, gamma).unwrap().with_seed(s);
        let out = match recursive_boost(ds, &spec, &config) {
            Ok(o) => o,
            Err(_) => continue,
        };
        runs += 1;
        if !out.all_audits_passed() {
            continue;
        }
        audited += 1;
        if !ds.examples().iter().all(|e| out.chain.predict(&e.instance) == e.label) {
            inconsistent += 1;
        }
        let p_real = out.hint_length();
        let phases = out.chain.phases_run();
        let m0 = spec.m0();
        let expected = phases * config.rounds * m0 + m0 * p_real;
        if compression_size(&out.record) != expected || phases + 1 > p_real.max(1) {
            size_mismatch += 1;
        }
        sizes.push(format!("{}:{}", p_real, compression_size(&out.record)));
    }
    verdict(
        audited > 0 && inconsistent == 0 && size_mismatch == 0,
        format!(
            "{runs} runs, {audited} fully audited; {inconsistent} inconsistent, {size_mismatch} size mismatches; p′:r = {}",
            sizes.join(" ")
        ),
    )
}

// 6. Generalization bound on planted classes.
fn criterion_6() -> Verdict {
    let seeds: Vec<u64> = (0..60).collect();
    let config = ExperimentConfig {
        data: DataSource::Generate(GenSpec::Planted(PlantedParams {
            m: 400,
            labels: 6,
            universe: 30,
            class_size: 48,
            skewed: true,
            ..Default::default()
        })),
        pipeline: PipelineConfig::Boost {
            learner: LearnerDescriptor::Erm,
            m0: 20,
            gamma: 0.3,
            rounds: None,
            eta: None,
            p: None,
            adaptive: false,
            gamma_min: None,
        },
        seeds: seeds.clone(),
        delta: 0.1,
        timing: false,
    };
    let report = mcboost::run_experiment(&config).unwrap();
    let n = report.rows.len() as f64;
    let consistent = report.rows.iter().filter(|r| r.consistent == Some(true)).count();
    let finite = report
        .rows
        .iter()
        .filter(|r| r.consistent == Some(true) && r.epsilon.is_some())
        .count();
    let violations = report
        .rows
        .iter()
        .filter(|r| r.consistent == Some(true) && matches!((r.true_error, r.epsilon), (Some(e), Some(b)) if e > b))
        .count();
    let failed = report.rows.iter().filter(|r| r.error.is_some()).count();
    let delta: f64 = 0.1;
    let limit = delta + 3.0 * (delta * (1.0 - delta) / 50.0).sqrt();
    let rate = violations as f64 / n;
    let mean_eps = report.aggregate.mean_epsilon.unwrap_or(f64::NAN);
    verdict(
        rate <= limit && failed == 0 && finite > 0,
        format!(
            "{} seeds: {consistent} consistent ({finite} with ε < ∞, mean ε {mean_eps:.3}), {violations} violations; rate {rate:.3} ≤ {limit:.3}",
            seeds.len()
        ),
    )
}

// 7. Unused labels cost nothing.
fn criterion_7() -> Verdict {
    let g = planted(7, 200, 8, 30, 32);
    let ds = g.train.clone();
    let wide = ds.with_extra_labels(8);
    let spec = WeakLearnerSpec::new(Arc::new(MemorizingOracle), 40).unwrap();
    let config = BoostConfig::for_sample(ds.len(), 0.3).unwrap().with_seed(3);
    let run = |d: &Dataset| {
        let start = Instant::now();
        let out = recursive_boost(d, &spec, &config).unwrap();
        (start.elapsed(), out)
    };
    let (_, a) = run(&ds);
    let (_, b) = run(&wide);
    let calls_eq = a.oracle_calls == b.oracle_calls;
    let size_eq = compression_size(&a.record) == compression_size(&b.record);
    let (mut ta, mut tb) = (Duration::MAX, Duration::MAX);
    for _ in 0..7 {
        ta = ta.min(run(&ds).0);
        tb = tb.min(run(&wide).0);
    }
    let ratio = tb.as_secs_f64() / ta.as_secs_f64();
    verdict(
        calls_eq && size_eq && (ratio - 1.0).abs() < 0.10,
        format!(
            "|Y| 8→16: oracle calls {}→{}, r {}→{}, wall {:.1}ms→{:.1}ms ({:+.1}%)",
            a.oracle_calls,
            b.oracle_calls,
            compression_size(&a.record),
            compression_size(&b.record),
            ta.as_secs_f64() * 1e3,
            tb.as_secs_f64() * 1e3,
            (ratio - 1.0) * 100.0
        ),
    )
}

fn closed_form_q(k: usize, delta: f64) -> usize {
    (2.0 * k as f64 * (2.0 / delta).ln()).ceil() as usize
}

fn closed_form_r_val(k: usize, epsilon: f64, delta: f64, q: usize) -> usize {
    let e = epsilon / k as f64;
    (10.0 * (2.0 * q as f64 / delta).ln() / (e * e)).ceil() as usize
}

// 8. Weak ⇄ list conversions.
fn criterion_8() -> Verdict {
    let mut notes = Vec::new();
    // weak → list
    let mut w2l_ok = true;
    for s in 0..5u64 {
        let mut rng = RandomStream::new(8000 + s);
        let ds = keyed(200, 8, &mut rng);
        let params = WeakToListParams::new(ds.len(), 0.3).unwrap();
        let spec = WeakLearnerSpec::new(Arc::new(CalibratedOracle::new(0.3).unwrap()), 1).unwrap();
        let out = weak_to_list(&ds, &spec, &params, &RandomStream::new(s), true).unwrap();
        let probes: Vec<Instance> = (0..200).map(|i| Instance::key(format!("probe{i}"))).collect();
        let sizes_ok = ds
            .examples()
            .iter()
            .map(|e| &e.instance)
            .chain(&probes)
            .all(|x| out.list.lookup(x).len() < params.k);
        let covered = ds.examples().iter().all(|e| out.list.contains(&e.instance, e.label));
        w2l_ok &= params.k == 4 && sizes_ok && covered && out.list.declared_size() == 3;
    }
    notes.push(format!("weak→list k=4: sizes ≤ 3 and full coverage on 5/5: {w2l_ok}"));
    // closed forms
    let mut forms_ok = true;
    for &(k, eps, delta) in &[(2, 0.2, 0.1), (3, 0.05, 0.02), (1, 0.3, 0.5), (5, 0.1, 0.01)] {
        let p = ListToWeakParams::new(k, eps, delta).unwrap();
        let q = closed_form_q(k, delta);
        forms_ok &= p.q == q && p.r_val == closed_form_r_val(k, eps, delta, q);
    }
    let p = ListToWeakParams::new(2, 0.2, 0.1).unwrap();
    forms_ok &= p.q == 12 && p.r_val == 5481;
    notes.push(format!(
        "q, r_val closed forms: {forms_ok} (k=2, ε=0.2, δ=0.1 → q={}, r_val={})",
        p.q, p.r_val
    ));
    // list → weak
    let target = (1.0 - 2.0 * 0.2) / 2.0 - 0.05;
    let mut good = 0;
    for s in 0..50u64 {
        let mut rng = RandomStream::new(8100 + s);
        let ds = keyed(6000, 5, &mut rng);
        let learner = PlantedListLearner::new(truth(&ds), 5, 2, 0.2, s).unwrap();
        let out = list_to_weak(&learner, &ds, &p, &RandomStream::new(s)).unwrap();
        if out.validation_accuracy >= target {
            good += 1;
        }
    }
    notes.push(format!("list→weak accuracy ≥ {target:.2} on {good}/50 seeds"));
    verdict(w2l_ok && forms_ok && good >= 45, notes.join("; "))
}

fn catalog() -> Vec<(&'static str, FiniteClass, usize, usize)> {
    let pseudo = FiniteClass::from_table(&[&[0, 0], &[1, 1], &[2, 2], &[0, 1], &[1, 2], &[2, 0]], 3).unwrap();
    vec![
        ("{0,1}^2", FiniteClass::full(2, 2), 1, 2),
        ("{0,1}^3", FiniteClass::full(2, 3), 1, 3),
        ("singleton", FiniteClass::from_table(&[&[0, 1, 1]], 2).unwrap(), 1, 0),
        ("[3]^1", FiniteClass::full(3, 1), 2, 1),
        ("pseudo-cube", pseudo.clone(), 1, 2),
        ("pseudo-cube", pseudo, 2, 1),
        ("[3]^2", FiniteClass::full(3, 2), 2, 2),
    ]
}

// 9. One-inclusion graph suite.
fn criterion_9() -> Verdict {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, class, k, want) in catalog() {
        let d = kds_dimension(&class, k, 1 << 20).unwrap().d;
        let class = Arc::new(class);
        let g = build_oig(&class);
        let (_, m_opt) = find_orientation(&g, k, OrientationStrategy::Flow).unwrap();
        let learner = OneInclusionLearner::new(Arc::clone(&class), k, OrientationStrategy::Flow).unwrap();
        let cols: Vec<usize> = (0..class.n_columns()).collect();
        let mut loo_ok = true;
        for row in 0..class.len() {
            let l = learner.leave_one_out(&cols, row).unwrap();
            // errors / (n+1) ≤ M / (n+1), compared on integers.
            loo_ok &= l.errors <= l.max_out_degree && l.max_out_degree == m_opt;
        }
        ok &= d == want && loo_ok;
        notes.push(format!(
            "{name} k={k}: d={d} (want {want}), LOO {}",
            if loo_ok { "ok" } else { "FAIL" }
        ));
    }
    // k-list PAC learning on random classes of small dimension.
    let (mut tried, mut consistent) = (0, 0);
    let mut rng = RandomStream::new(9000);
    while tried < 10 {
        let n = rng.gen_range(4..=6);
        let rows: Vec<Vec<u32>> = (0..rng.gen_range(4..=10))
            .map(|_| (0..n).map(|_| rng.gen_range(0..3)).collect())
            .collect();
        let refs: Vec<&[u32]> = rows.iter().map(|r| r.as_slice()).collect();
        let Ok(class) = FiniteClass::from_table(&refs, 3) else {
            continue;
        };
        let k = 1 + tried % 2;
        if kds_dimension(&class, k, 1 << 20).unwrap().d > 2 {
            continue;
        }
        tried += 1;
        let class = Arc::new(class);
        let row = rng.gen_range(0..class.len());
        let m = rng.gen_range(10..=50);
        let ex = (0..m)
            .map(|_| {
                let c = rng.gen_range(0..class.n_columns());
                LabeledExample::new(class.columns()[c].clone(), class.value(row, c))
            })
            .collect();
        let ds = Dataset::new(ex, 3).unwrap();
        let mut params = ListPacParams::new(k);
        params.seed = tried as u64;
        if let Ok(out) = k_list_pac_learn(Arc::clone(&class), &ds, &params) {
            let fits = ds.examples().iter().all(|e| out.list.contains(&e.instance, e.label));
            let small = class.columns().iter().all(|x| out.list.lookup(x).len() <= k);
            if fits && small {
                consistent += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ok &= consistent == tried && elapsed < Duration::from_secs(120);
    notes.push(format!(
        "list-PAC consistent k-lists on {consistent}/{tried} planted classes; {:.1}s",
        elapsed.as_secs_f64()
    ));
    verdict(ok, notes.join("; "))
}

fn probes(g: &harness::Generated, rng: &mut RandomStream) -> Vec<Instance> {
    let known: Vec<Instance> = g.train.examples().iter().map(|e| e.instance.clone()).collect();
    let dim = known[0].features().map(<[f64]>::len);
    (0..1000)
        .map(|i| match (dim, i % 2) {
            (_, 0) => known[rng.gen_range(0..known.len())].clone(),
            (Some(d), _) => Instance::Point((0..d).map(|_| rng.gen::<f64>()).collect()),
            (None, _) => Instance::key(format!("probe{i}")),
        })
        .collect()
}

enum Data {
    Planted(PlantedParams),
    Intervals(usize),
}

/// One feature in [0, 1), label = which third it falls in.
fn intervals(m: usize, rng: &mut RandomStream) -> harness::Generated {
    let ex = (0..m)
        .map(|_| {
            let x: f64 = rng.gen();
            LabeledExample::new(Instance::Point(vec![x]), Label((x * 3.0) as u32))
        })
        .collect();
    harness::Generated {
        train: Dataset::new(ex, 3).unwrap(),
        heldout: None,
        class: None,
        target_row: None,
        universe_weights: None,
    }
}

// 10. Serialize, reconstruct, predict.
fn criterion_10() -> Verdict {
    let keyed_spec = |m| PlantedParams {
        m,
        labels: 6,
        universe: 25,
        class_size: 32,
        ..Default::default()
    };
    let cases: Vec<(&str, Data, PipelineConfig)> = vec![
        (
            "boost/erm",
            Data::Planted(keyed_spec(150)),
            PipelineConfig::Boost {
                learner: LearnerDescriptor::Erm,
                m0: 10,
                gamma: 0.3,
                rounds: Some(60),
                eta: None,
                p: None,
                adaptive: false,
                gamma_min: None,
            },
        ),
        (
            "boost/stump",
            Data::Intervals(120),
            PipelineConfig::Boost {
                learner: LearnerDescriptor::Stump,
                m0: 30,
                gamma: 0.1,
                rounds: Some(40),
                eta: None,
                p: None,
                adaptive: true,
                gamma_min: Some(0.01),
            },
        ),
        (
            "hedge/erm",
            Data::Planted(keyed_spec(150)),
            PipelineConfig::Hedge {
                learner: LearnerDescriptor::Erm,
                m0: 8,
                gamma: 0.2,
                rounds: Some(50),
                eta: None,
            },
        ),
        (
            "list-boost/planted",
            Data::Planted(keyed_spec(200)),
            PipelineConfig::ListBoost {
                list_learner: ListLearnerDescriptor::Planted {
                    k: 2,
                    epsilon: 0.25,
                    salt: 1,
                    target_row: 0,
                },
                eps0: 0.25,
                config: ListBoostConfig {
                    q: Some(4),
                    r_val: Some(100),
                    rounds: Some(150),
                    ..Default::default()
                },
            },
        ),
        (
            "oig-listpac",
            Data::Planted(PlantedParams {
                m: 40,
                labels: 3,
                universe: 6,
                class_size: 8,
                ..Default::default()
            }),
            PipelineConfig::OigListpac {
                params: ListPacParams::new(1),
            },
        ),
    ];
    let mut notes = Vec::new();
    let mut ok = true;
    for (i, (name, gen, config)) in cases.into_iter().enumerate() {
        let mut rng = RandomStream::new(10 + i as u64);
        let g = match gen {
            Data::Planted(p) => gen_data(&GenSpec::Planted(p), &rng).unwrap(),
            Data::Intervals(m) => intervals(m, &mut rng),
        };
        let config = match config {
            PipelineConfig::ListBoost {
                list_learner: ListLearnerDescriptor::Planted { k, epsilon, salt, .. },
                eps0,
                config,
            } => PipelineConfig::ListBoost {
                list_learner: ListLearnerDescriptor::Planted {
                    k,
                    epsilon,
                    salt,
                    target_row: g.target_row.unwrap(),
                },
                eps0,
                config,
            },
            c => c,
        };
        let class = g.class.clone().map(Arc::new);
        let result = harness::train(&config, &g.train, class.as_ref(), i as u64).and_then(|t| {
            let text = serde_json::to_string(&t.model).unwrap();
            let back: Model = serde_json::from_str(&text).unwrap();
            let replayed = back.reconstruct(&g.train)?;
            let mut rng = RandomStream::new(99);
            let points: Vec<Instance> = g
                .train
                .examples()
                .iter()
                .map(|e| e.instance.clone())
                .chain(probes(&g, &mut rng))
                .collect();
            let same = points
                .iter()
                .all(|x| t.predictor.predict(x) == replayed.predict(x) && t.predictor.list(x) == replayed.list(x));
            Ok((same, points.len(), compression_size(&t.model.record)))
        });
        match result {
            Ok((same, n, r)) => {
                ok &= same;
                notes.push(format!(
                    "{name}: {} on {n} points (r={r})",
                    if same { "identical" } else { "DIFFERS" }
                ));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("{name}: error {e}"));
            }
        }
    }
    verdict(ok, notes.join("; "))
}

fn main() {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let run =
        |n: usize| wanted.is_empty() || wanted.contains(&n) || (n == 3 && (wanted.contains(&1) || wanted.contains(&2)));
    let mut tally = RegretTally::default();
    let mut results: Vec<(usize, Verdict, Duration)> = Vec::new();
    let mut record = |n: usize, f: &mut dyn FnMut() -> Verdict| {
        if !run(n) {
            return;
        }
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        println!(
            "criterion {n:>2}: {} — {} [{:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64()
        );
        results.push((n, v, elapsed));
    };
    record(1, &mut || criterion_1(&mut tally));
    record(2, &mut || criterion_2(&mut tally));
    record(3, &mut || criterion_3(&tally));
    record(4, &mut criterion_4);
    record(5, &mut criterion_5);
    record(6, &mut criterion_6);
    record(7, &mut criterion_7);
    record(8, &mut criterion_8);
    record(9, &mut criterion_9);
    record(10, &mut criterion_10);
    let failed: Vec<usize> = results.iter().filter(|r| !r.1.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failed {failed:?}")
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
