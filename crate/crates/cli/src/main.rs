use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mcboost::compression::{compression_size, generalization_bound};
use mcboost::domain::{Alphabet, Dataset, Instance, ListFunction, RandomStream};
use mcboost::harness::{
    self, gen_data, read_class_file, read_dataset_with, render_dataset, run_experiment, train, write_dataset,
    write_json, ExperimentConfig, GenSpec, LearnerDescriptor, ListLearnerDescriptor, Model, PipelineConfig,
    PlantedParams, Predictor,
};
use mcboost::hint::build_initial_hint;
use mcboost::listlearn::ListBoostConfig;
use mcboost::oig::{
    build_oig, find_orientation, k_list_pac_learn, kds_dimension, ClassFile, FiniteClass, ListPacParams,
    OneInclusionLearner, OrientationStrategy,
};
use mcboost::recursive::default_hint_length;
use mcboost::weak_learn::audit_brg;
use mcboost::{sample_iid, BrgAuditLog, ExampleDistribution};
use serde_json::{json, Value};

/// Multiclass boosting with hint lists.
#[derive(Parser)]
#[command(name = "mcboost", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset.
    GenData(GenArgs),
    /// Recursive boosting; optionally writes a model file.
    Boost(BoostArgs),
    /// Build the initial hint list only.
    Hint(HintArgs),
    /// Audit a weak learner on random samples.
    Audit(AuditArgs),
    /// Boost a list learner into a shorter-list learner.
    ListBoost(ListBoostArgs),
    /// One-inclusion graph tools on a finite class.
    Oig(OigArgs),
    /// Evaluate the compression bound.
    CompressBound(BoundArgs),
    /// Run a pipeline over many seeds from a config file.
    Experiment(ExperimentArgs),
    /// Replay a model and predict.
    Predict(PredictArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Training set (JSON lines).
    #[arg(long)]
    data: PathBuf,
    /// Finite class file.
    #[arg(long)]
    class: Option<PathBuf>,
    /// Label alphabet, comma separated; defaults to the file header or the
    /// observed labels.
    #[arg(long, value_delimiter = ',')]
    alphabet: Option<Vec<i64>>,
}

struct Loaded {
    dataset: Dataset,
    class: Option<Arc<FiniteClass>>,
}

impl DataArgs {
    fn load(&self) -> Result<Loaded> {
        let file = self
            .class
            .as_deref()
            .map(read_class_file)
            .transpose()
            .context("reading class file")?;
        let dataset = read_dataset_with(&self.data, self.alphabet.as_deref(), file.as_ref())
            .with_context(|| format!("reading {}", self.data.display()))?;
        let class = file
            .map(|f| FiniteClass::from_file(f, dataset.alphabet()).map(Arc::new))
            .transpose()?;
        Ok(Loaded { dataset, class })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Planted,
    Counterexample,
    Noisy,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "planted")]
    kind: GenKind,
    #[arg(long, default_value_t = 100)]
    m: usize,
    /// Alphabet size.
    #[arg(long, default_value_t = 4)]
    labels: usize,
    /// Instances in the universe.
    #[arg(long, default_value_t = 30)]
    universe: usize,
    #[arg(long, default_value_t = 32)]
    class_size: usize,
    /// Numeric instances of this dimension instead of keys.
    #[arg(long)]
    features: Option<usize>,
    #[arg(long, default_value_t = 2)]
    mutations: usize,
    /// Non-uniform weights over the universe.
    #[arg(long)]
    skewed: bool,
    /// Held-out sample size.
    #[arg(long, default_value_t = 0)]
    heldout: usize,
    /// Label noise rate (noisy kind).
    #[arg(long, default_value_t = 0.0)]
    rate: f64,
    /// Counterexample multiplicities of a, b, c.
    #[arg(long, value_delimiter = ',', default_value = "1,1,1")]
    multiplicity: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    class_out: Option<PathBuf>,
    #[arg(long)]
    heldout_out: Option<PathBuf>,
}

#[derive(Args)]
struct BoostArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Pipeline config (JSON, boost pipeline); flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// erm | stump | too-weak | oracle | calibrated:EDGE | random:SALT | constant:LABEL
    #[arg(long)]
    weak_learner: Option<String>,
    #[arg(long)]
    m0: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    /// Maximal hint length.
    #[arg(long)]
    p: Option<usize>,
    /// Halve gamma on failure.
    #[arg(long)]
    adaptive: bool,
    #[arg(long)]
    gamma_min: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Exit non-zero unless every audit passed and the predictor is
    /// consistent.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct HintArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    weak_learner: String,
    #[arg(long, default_value_t = 16)]
    m0: usize,
    #[arg(long)]
    gamma: f64,
    /// Rounds; defaults to ⌈ln m / γ⌉.
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exit non-zero unless every training label is covered and every
    /// round passed its audit.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    weak_learner: String,
    #[arg(long, default_value_t = 16)]
    m0: usize,
    #[arg(long)]
    gamma: f64,
    /// Learner calls, each on a fresh uniform sample.
    #[arg(long, default_value_t = 20)]
    calls: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    check: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ListLearnerKind {
    Planted,
    VersionSpace,
}

#[derive(Args)]
struct ListBoostArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    k0: usize,
    #[arg(long)]
    eps0: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, value_enum, default_value = "planted")]
    list_learner: ListLearnerKind,
    /// Planted target; defaults to the first class row consistent with the
    /// data.
    #[arg(long)]
    target_row: Option<usize>,
    /// Miss rate of the planted learner; defaults to eps0.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    salt: u64,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    r_val: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    m0: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Audit each Hedge round.
    #[arg(long)]
    audit: bool,
    /// Held-out set for list coverage.
    #[arg(long)]
    heldout: Option<PathBuf>,
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Exit non-zero unless the list covers every training label within
    /// the size bound.
    #[arg(long)]
    check: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Flow,
    Greedy,
    Exhaustive,
}

#[derive(Args)]
struct OigArgs {
    #[arg(long)]
    class: PathBuf,
    #[arg(long, value_delimiter = ',')]
    alphabet: Option<Vec<i64>>,
    /// Training set for --predict and --listpac.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// k-DS dimension.
    #[arg(long)]
    dim: bool,
    /// Orientation of the full one-inclusion graph.
    #[arg(long)]
    orient: bool,
    /// List predictions for these instance keys (or a JSON-lines file via
    /// --query).
    #[arg(long, value_delimiter = ',')]
    predict: Option<Vec<String>>,
    #[arg(long)]
    query: Option<PathBuf>,
    /// k-list PAC learning on --data.
    #[arg(long)]
    listpac: bool,
    /// Dimension for --listpac; computed when absent.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_enum, default_value = "flow")]
    strategy: Strategy,
    /// Search budget; defaults to MCBOOST_BUDGET or the library default.
    #[arg(long, env = "MCBOOST_BUDGET")]
    budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exit non-zero unless orientations validate and list-PAC lists are
    /// consistent.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, required_unless_present = "model")]
    r: Option<usize>,
    #[arg(long, required_unless_present = "model")]
    m: Option<usize>,
    /// Read r and m from a model's record.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// `a..b` or a comma-separated list.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    timing: bool,
    /// CSV instead of JSON lines.
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit non-zero if a seed failed, an audited run is inconsistent or a
    /// bound is violated.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// The training set the model was fit on.
    #[arg(long)]
    data: PathBuf,
    /// Points to predict (JSON lines; `y` optional).
    #[arg(long)]
    query: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(value: &Value) {
    stdout(&format!("{}\n", serde_json::to_string_pretty(value).expect("json")));
}

/// Writes to stdout; a reader that went away early (`| head`) is not an error.
fn stdout(text: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: writing stdout: {e}");
            std::process::exit(2);
        }
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            stdout(text);
            Ok(())
        }
    }
}

fn verdict(check: bool, ok: bool) -> ExitCode {
    if check && !ok {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn gen(a: GenArgs) -> Result<ExitCode> {
    let planted = PlantedParams {
        m: a.m,
        labels: a.labels,
        universe: a.universe,
        class_size: a.class_size,
        features: a.features,
        heldout: a.heldout,
        mutations: a.mutations,
        skewed: a.skewed,
    };
    let spec = match a.kind {
        GenKind::Planted => GenSpec::Planted(planted),
        GenKind::Noisy => GenSpec::Noisy { planted, rate: a.rate },
        GenKind::Counterexample => {
            let [x, y, z] = a.multiplicity[..] else {
                bail!("--multiplicity needs three values");
            };
            GenSpec::Counterexample {
                multiplicities: [x, y, z],
            }
        }
    };
    let g = gen_data(&spec, &RandomStream::new(a.seed))?;
    write_or_print(a.out.as_deref(), &render_dataset(&g.train))?;
    if let Some(p) = &a.class_out {
        let class = g.class.as_ref().context("this kind has no ground-truth class")?;
        write_json(p, &class.to_file(g.train.alphabet()))?;
    }
    if let (Some(p), Some(h)) = (&a.heldout_out, &g.heldout) {
        write_dataset(p, h)?;
    }
    if let Some(row) = g.target_row {
        eprintln!("target row {row}");
    }
    Ok(ExitCode::SUCCESS)
}

fn learner(name: &str) -> Result<LearnerDescriptor> {
    Ok(name.parse()?)
}

fn boost(a: BoostArgs) -> Result<ExitCode> {
    let l = a.data.load()?;
    let base = match &a.config {
        Some(p) => {
            let c: PipelineConfig = serde_json::from_str(&fs::read_to_string(p)?).context("parsing config")?;
            Some(c)
        }
        None => None,
    };
    let (mut lrn, mut m0, mut gamma, mut rounds, mut eta, mut p, mut adaptive, mut gamma_min) =
        (None, 16, None, None, None, None, false, None);
    if let Some(c) = base {
        let PipelineConfig::Boost {
            learner,
            m0: c_m0,
            gamma: g,
            rounds: r,
            eta: e,
            p: cp,
            adaptive: ad,
            gamma_min: gm,
        } = c
        else {
            bail!("config describes the {} pipeline; boost expects boost", c.name());
        };
        (lrn, m0, gamma, rounds, eta, p, adaptive, gamma_min) = (Some(learner), c_m0, Some(g), r, e, cp, ad, gm);
    }
    if let Some(w) = &a.weak_learner {
        lrn = Some(learner(w)?);
    }
    let config = PipelineConfig::Boost {
        learner: lrn.context("no weak learner: pass --weak-learner or a config")?,
        m0: a.m0.unwrap_or(m0),
        gamma: a.gamma.or(gamma).context("no gamma: pass --gamma or a config")?,
        rounds: a.rounds.or(rounds),
        eta: a.eta.or(eta),
        p: a.p.or(p),
        adaptive: a.adaptive || adaptive,
        gamma_min: a.gamma_min.or(gamma_min),
    };
    let t = train(&config, &l.dataset, l.class.as_ref(), a.seed)?;
    let m = l.dataset.len();
    let acc = t.predictor.train_accuracy(&l.dataset, false);
    let pass = t.model.audits.pass_rate;
    let consistent = (pass >= 1.0).then_some(acc >= 1.0);
    let r = t.compression_size();
    let epsilon = match consistent {
        Some(true) => generalization_bound(r, m as f64, a.delta).ok(),
        _ => None,
    };
    let (hint_length, phases) = match &t.predictor {
        Predictor::Chain(c) => (c.hint_hypotheses().len(), c.phases_run()),
        _ => (0, 0),
    };
    if let Some(path) = &a.model_out {
        write_json(path, &t.model)?;
    }
    emit(&json!({
        "m": m,
        "gamma": t.model.audits.gamma,
        "hint_length": hint_length,
        "phases": phases,
        "r": r,
        "train_accuracy": acc,
        "consistent": consistent,
        "epsilon": epsilon,
        "audit_pass_rate": pass,
        "oracle_calls": t.oracle_calls,
        "config": t.model.resolved,
    }));
    Ok(verdict(a.check, consistent == Some(true)))
}

fn hint(a: HintArgs) -> Result<ExitCode> {
    let l = a.data.load()?;
    let spec = learner(&a.weak_learner)?.build(l.class.as_ref(), a.m0)?;
    let m = l.dataset.len();
    let p = a.p.unwrap_or_else(|| default_hint_length(m, a.gamma));
    let h = build_initial_hint(
        &l.dataset,
        &spec,
        p,
        &RandomStream::new(a.seed).child("hint"),
        Some(a.gamma),
    )?;
    let ok = h.covered() && h.audits.all_passed();
    emit(&json!({
        "p": p,
        "rounds": h.hypotheses.len(),
        "residual_sizes": h.residual_sizes,
        "residual": h.residual,
        "covered": h.covered(),
        "audit_failures": h.audits.failures(),
    }));
    Ok(verdict(a.check, ok))
}

fn audit(a: AuditArgs) -> Result<ExitCode> {
    let l = a.data.load()?;
    let ds = &l.dataset;
    let spec = learner(&a.weak_learner)?.build(l.class.as_ref(), a.m0)?;
    let mu = ListFunction::universal(ds.alphabet_size());
    let dist = ExampleDistribution::<f64>::uniform(ds.len());
    let rng = RandomStream::new(a.seed);
    let mut log = BrgAuditLog::new();
    let mut calls = Vec::new();
    for c in 0..a.calls {
        let sample = sample_iid(&dist, spec.m0(), &mut rng.child(format!("call-{c}")))?;
        let h = spec.fit(ds, sample, &mu, Some(dist.weights()))?;
        let r = audit_brg(&h, ds, &dist, &mu, a.gamma, &mut log)?;
        calls.push(json!({"accuracy": r.accuracy, "threshold": r.threshold, "pass": r.pass}));
    }
    emit(&json!({
        "k": ds.alphabet_size(),
        "gamma": a.gamma,
        "calls": calls,
        "failures": log.failures(),
        "pass_rate": (log.len() - log.failures()) as f64 / log.len().max(1) as f64,
    }));
    Ok(verdict(a.check, log.all_passed()))
}

fn list_boost_cmd(a: ListBoostArgs) -> Result<ExitCode> {
    let l = a.data.load()?;
    let ds = &l.dataset;
    let class = l.class.as_ref().context("list-boost needs --class")?;
    let list_learner = match a.list_learner {
        ListLearnerKind::VersionSpace => ListLearnerDescriptor::VersionSpace { k: a.k0 },
        ListLearnerKind::Planted => ListLearnerDescriptor::Planted {
            k: a.k0,
            epsilon: a.epsilon.unwrap_or(a.eps0),
            salt: a.salt,
            target_row: match a.target_row {
                Some(r) => r,
                None => *class
                    .consistent_rows(ds)?
                    .first()
                    .context("no class row is consistent with the data; pass --target-row")?,
            },
        },
    };
    let config = PipelineConfig::ListBoost {
        list_learner,
        eps0: a.eps0,
        config: ListBoostConfig {
            delta: a.delta,
            gamma: a.gamma,
            epsilon: None,
            q: a.q,
            r_val: a.r_val,
            rounds: a.rounds,
            m0: a.m0,
            seed: a.seed,
            audit: a.audit,
        },
    };
    let t = train(&config, ds, Some(class), a.seed)?;
    let bound = t.list_size.unwrap_or(0);
    let sizes: Vec<usize> = ds
        .examples()
        .iter()
        .map(|e| t.predictor.list(&e.instance).len())
        .collect();
    let max_list = sizes.iter().copied().max().unwrap_or(0);
    let coverage = t.predictor.train_accuracy(ds, true);
    let heldout = match &a.heldout {
        Some(p) => {
            let h = read_dataset_with(p, Some(&external(ds.alphabet())), None)?;
            Some(t.predictor.train_accuracy(&h, true))
        }
        None => None,
    };
    if let Some(path) = &a.model_out {
        write_json(path, &t.model)?;
    }
    emit(&json!({
        "list_size": bound,
        "max_train_list": max_list,
        "train_coverage": coverage,
        "heldout_coverage": heldout,
        "r": t.compression_size(),
        "oracle_calls": t.oracle_calls,
        "audit_pass_rate": t.model.audits.pass_rate,
    }));
    Ok(verdict(a.check, coverage >= 1.0 && max_list <= bound))
}

fn external(a: &Alphabet) -> Vec<i64> {
    a.labels().map(|l| a.external(l)).collect()
}

fn class_alphabet(file: &ClassFile, forced: Option<&[i64]>) -> Result<Alphabet> {
    let values: Vec<i64> = match forced {
        Some(v) => v.to_vec(),
        None => {
            let mut v: Vec<i64> = file.rows.iter().flatten().copied().collect();
            v.sort_unstable();
            v.dedup();
            if v.len() < 2 {
                v.push(v.last().map_or(0, |x| x + 1));
            }
            v
        }
    };
    Ok(Alphabet::from_external(values)?)
}

fn oig(a: OigArgs) -> Result<ExitCode> {
    let file = read_class_file(&a.class)?;
    let dataset = match &a.data {
        Some(p) => Some(read_dataset_with(p, a.alphabet.as_deref(), Some(&file))?),
        None => None,
    };
    let alphabet = match &dataset {
        Some(d) => d.alphabet().clone(),
        None => class_alphabet(&file, a.alphabet.as_deref())?,
    };
    let class = Arc::new(FiniteClass::from_file(file, &alphabet)?);
    let budget = a.budget;
    let strategy = match a.strategy {
        Strategy::Flow => OrientationStrategy::Flow,
        Strategy::Greedy => OrientationStrategy::Greedy,
        Strategy::Exhaustive => OrientationStrategy::Exhaustive {
            budget: budget.unwrap_or(mcboost::oig::DEFAULT_ORIENTATION_BUDGET),
        },
    };
    let mut out = serde_json::Map::new();
    let mut ok = true;
    if a.dim {
        let r = kds_dimension(&class, a.k, budget.unwrap_or(mcboost::oig::DEFAULT_DIMENSION_BUDGET))?;
        let cols: Vec<String> = r.columns.iter().map(|&c| class.columns()[c].to_string()).collect();
        out.insert("dimension".into(), json!({"k": r.k, "d": r.d, "columns": cols}));
    }
    if a.orient {
        let g = build_oig(&class);
        let (o, max) = find_orientation(&g, a.k, strategy)?;
        let valid = o.validate(&g).is_ok();
        ok &= valid;
        out.insert(
            "orientation".into(),
            json!({"vertices": g.n_vertices(), "edges": g.edges().len(), "max_out_degree": max, "valid": valid}),
        );
    }
    if a.predict.is_some() || a.query.is_some() {
        let ds = dataset.as_ref().context("--predict needs --data")?;
        let learner = OneInclusionLearner::new(Arc::clone(&class), a.k, strategy)?;
        let mut points: Vec<Instance> = a.predict.iter().flatten().map(|k| Instance::key(k.clone())).collect();
        if let Some(q) = &a.query {
            points.extend(read_points(q)?.into_iter().map(|(x, _)| x));
        }
        let preds = points
            .iter()
            .map(|x| {
                let l = learner.predict(ds.examples(), x)?;
                Ok(json!({"x": x, "list": l.iter().map(|&y| alphabet.external(y)).collect::<Vec<_>>()}))
            })
            .collect::<Result<Vec<_>>>()?;
        out.insert("predictions".into(), Value::Array(preds));
    }
    if a.listpac {
        let ds = dataset.as_ref().context("--listpac needs --data")?;
        let mut params = ListPacParams::new(a.k);
        params.d = a.d;
        params.strategy = strategy;
        params.seed = a.seed;
        if let Some(b) = budget {
            params.cover_budget = b;
            params.dimension_budget = b;
        }
        let r = k_list_pac_learn(Arc::clone(&class), ds, &params)?;
        let consistent = ds.examples().iter().all(|e| r.list.contains(&e.instance, e.label));
        let max_list = class
            .columns()
            .iter()
            .map(|x| r.list.lookup(x).len())
            .max()
            .unwrap_or(0);
        ok &= consistent && max_list <= a.k;
        out.insert(
            "listpac".into(),
            json!({"d": r.d, "q": r.q, "p": r.p, "r": compression_size(&r.record), "rounds": r.rounds,
                   "consistent": consistent, "max_list": max_list}),
        );
    }
    if out.is_empty() {
        bail!("nothing to do: pass --dim, --orient, --predict/--query or --listpac");
    }
    emit(&Value::Object(out));
    Ok(verdict(a.check, ok))
}

fn bound(a: BoundArgs) -> Result<ExitCode> {
    let (r, m) = match &a.model {
        Some(p) => {
            let model: Model = serde_json::from_str(&fs::read_to_string(p)?)?;
            (compression_size(&model.record), model.record.m)
        }
        None => (a.r.expect("required"), a.m.expect("required")),
    };
    let eps = match generalization_bound(r, m as f64, a.delta) {
        Ok(e) => Some(e),
        Err(mcboost::Error::RTooLarge { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let vacuous = eps.is_none_or(|e| e >= 1.0);
    emit(&json!({"r": r, "m": m, "delta": a.delta, "epsilon": eps, "vacuous": vacuous}));
    Ok(ExitCode::SUCCESS)
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        return Ok((a..b).collect());
    }
    s.split(',').map(|v| Ok(v.trim().parse()?)).collect()
}

fn experiment(a: ExperimentArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let mut config: ExperimentConfig = serde_json::from_str(&text).context("parsing experiment config")?;
    if let Some(s) = &a.seeds {
        config.seeds = parse_seeds(s)?;
    }
    if let Some(d) = a.delta {
        config.delta = d;
    }
    config.timing |= a.timing;
    // Relative data paths are taken from the config's directory.
    if let harness::DataSource::Files { train, heldout, class } = &mut config.data {
        let dir = a.config.parent().unwrap_or(Path::new("."));
        for p in [Some(train), heldout.as_mut(), class.as_mut()].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }
    let report = run_experiment(&config)?;
    let text = if a.csv { report.to_csv() } else { report.to_jsonl() };
    write_or_print(a.out.as_deref(), &text)?;
    for row in &report.rows {
        if let Some(e) = &row.error {
            eprintln!("seed {}: {e}", row.seed);
        }
    }
    let g = &report.aggregate;
    Ok(verdict(
        a.check,
        g.failed == 0 && g.consistent == g.audited && g.bound_violations == 0,
    ))
}

fn read_points(path: &Path) -> Result<Vec<(Instance, Option<i64>)>> {
    fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str::<Value>)
        .filter(|v| !matches!(v, Ok(v) if v.get("alphabet").is_some()))
        .map(|v| {
            let mut v = v?;
            let x: Instance = serde_json::from_value(v.get_mut("x").context("point without x")?.take())?;
            Ok((x, v.get("y").and_then(Value::as_i64)))
        })
        .collect()
}

fn predict(a: PredictArgs) -> Result<ExitCode> {
    let model: Model = serde_json::from_str(&fs::read_to_string(&a.model)?).context("parsing model")?;
    let ds = read_dataset_with(&a.data, Some(&model.alphabet), None)?;
    let predictor = model.reconstruct(&ds)?;
    let alphabet = ds.alphabet();
    let (mut seen, mut hits) = (0, 0);
    let mut out = String::new();
    for (x, y) in read_points(&a.query)? {
        let pred = alphabet.external(predictor.predict(&x));
        let list: Vec<i64> = predictor.list(&x).iter().map(|&l| alphabet.external(l)).collect();
        if let Some(y) = y {
            seen += 1;
            hits += usize::from(if model.config.is_list() {
                list.contains(&y)
            } else {
                pred == y
            });
        }
        out.push_str(&serde_json::to_string(
            &json!({"x": x, "y": y, "prediction": pred, "list": list}),
        )?);
        out.push('\n');
    }
    write_or_print(a.out.as_deref(), &out)?;
    if seen > 0 {
        eprintln!("accuracy {:.6} on {seen} labelled points", hits as f64 / seen as f64);
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenData(a) => gen(a),
        Command::Boost(a) => boost(a),
        Command::Hint(a) => hint(a),
        Command::Audit(a) => audit(a),
        Command::ListBoost(a) => list_boost_cmd(a),
        Command::Oig(a) => oig(a),
        Command::CompressBound(a) => bound(a),
        Command::Experiment(a) => experiment(a),
        Command::Predict(a) => predict(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
