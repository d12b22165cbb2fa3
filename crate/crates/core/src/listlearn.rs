//! List learning: boosting a weak learner into a short-list learner,
//! turning a list learner back into a weak learner, and their composition.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compression::{CompressionRecord, PhaseRecord, PhaseTag};
use crate::domain::{fnv1a, Dataset, Instance, Label, LabeledExample, ListFunction, ListId, ListRule, RandomStream};
use crate::error::{Error, Result};
use crate::hedge::{default_eta, log_m, run_hedge, EdgeAudit, HedgeRun};
use crate::oig::FiniteClass;
use crate::recursive::{first_loss, replay_slot, shrink};
use crate::scalar::Scalar;
use crate::weak_learn::{Classifier, TrainRequest, WeakLearner, WeakLearnerSpec};

/// The smallest integer `k` with `1/k < γ`.
pub fn list_size_for<F: Scalar>(gamma: F) -> Result<usize> {
    if !(gamma > F::zero() && gamma < F::one()) {
        return Err(Error::InvalidGamma(gamma.as_f64()));
    }
    let mut k = 1usize;
    while F::one() / F::from_count(k) >= gamma {
        k += 1;
    }
    Ok(k)
}

/// Parameters of weak-to-list boosting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct WeakToListParams<F = f64> {
    pub gamma: F,
    /// Threshold list size; outputs have at most `k − 1` labels.
    pub k: usize,
    /// `σ = γ − 1/k`.
    pub sigma: F,
    pub rounds: usize,
    pub eta: F,
}

impl<F: Scalar> WeakToListParams<F> {
    /// `k` from `γ`, `T = ⌈8 ln m / σ²⌉` and `η = sqrt(ln m / (2T))`.
    pub fn new(m: usize, gamma: F) -> Result<Self> {
        Self::with_k(m, gamma, list_size_for(gamma)?)
    }

    /// Like [`new`](Self::new) with a given threshold size; `1/k < γ` is
    /// still required.
    pub fn with_k(m: usize, gamma: F, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParams(format!("list size k must be at least 2, got {k}")));
        }
        let sigma = gamma - F::one() / F::from_count(k);
        if sigma.is_nan() || sigma <= F::zero() {
            return Err(Error::InvalidParams(format!("1/{k} is not below gamma {gamma}")));
        }
        let rounds = ((F::lit(8.0) * log_m::<F>(m) / (sigma * sigma)).ceil().as_f64() as usize).max(1);
        Ok(WeakToListParams {
            gamma,
            k,
            sigma,
            rounds,
            eta: default_eta(m, rounds),
        })
    }

    /// Overrides `T`, recomputing `η`.
    pub fn with_rounds(mut self, m: usize, rounds: usize) -> Self {
        self.rounds = rounds.max(1);
        self.eta = default_eta(m, self.rounds);
        self
    }
}

/// Output of [`weak_to_list`].
#[derive(Clone, Debug)]
pub struct WeakToListOutcome<F = f64> {
    pub list: ListFunction,
    pub record: CompressionRecord,
    pub run: HedgeRun<F>,
    pub params: WeakToListParams<F>,
}

/// Hedge with the universal list, then `μ(x) = {ℓ : H(x, ℓ) > T/k}`,
/// highest count first; lists for unseen instances are cut to `k − 1`.
///
/// With `audit` set, every round is checked for accuracy at least `γ`.
pub fn weak_to_list<F: Scalar>(
    dataset: &Dataset,
    learner: &WeakLearnerSpec,
    params: &WeakToListParams<F>,
    rng: &RandomStream,
    audit: bool,
) -> Result<WeakToListOutcome<F>> {
    if dataset.is_empty() {
        return Err(Error::InvalidDataset("empty dataset".into()));
    }
    let universal = ListFunction::universal(dataset.alphabet_size());
    let run = run_hedge(
        dataset,
        &universal,
        learner,
        params.rounds,
        params.eta,
        &rng.child("weak-to-list"),
        audit.then(|| EdgeAudit::plain(params.gamma)),
    )?;
    let list = shrink(dataset, &universal, &run.scores, params.k, ListId::new("weak-to-list"))?;
    if let Some(i) = first_loss(dataset, &list) {
        return Err(Error::PhaseFailure { phase: 1, example: i });
    }
    let mut record = CompressionRecord::new(dataset.len());
    record.push(PhaseRecord {
        tag: PhaseTag::WeakToList,
        list_ref: None,
        list_size: params.k,
        slots: run.scores.hypotheses().iter().map(|h| h.record().clone()).collect(),
    });
    Ok(WeakToListOutcome {
        list,
        record,
        run,
        params: params.clone(),
    })
}

/// Rebuilds the list of a weak-to-list record.
pub fn replay_weak_to_list(
    record: &CompressionRecord,
    dataset: &Dataset,
    learner: &WeakLearnerSpec,
) -> Result<ListFunction> {
    if !learner.deterministic() {
        return Err(Error::NonDeterministicLearner { phase: 0, slot: 0 });
    }
    record.validate()?;
    let phase = match record.phases.as_slice() {
        [p] if p.tag == PhaseTag::WeakToList => p,
        _ => return Err(Error::MalformedRecord("expected a single weak-to-list phase".into())),
    };
    let universal = ListFunction::universal(dataset.alphabet_size());
    let mut table = crate::hedge::ScoreTable::new(dataset);
    for (s, slot) in phase.slots.iter().enumerate() {
        let h = replay_slot(dataset, learner, &universal, slot, 0, s)?;
        for _ in 1..slot.repeat {
            table.push(h.clone());
        }
        table.push(h);
    }
    shrink(
        dataset,
        &universal,
        &table,
        phase.list_size,
        ListId::new("weak-to-list"),
    )
}

/// A learner that outputs lists of (at most) `k` labels.
pub trait ListLearner: Send + Sync {
    fn name(&self) -> String;

    fn list_size(&self) -> usize;

    fn train(&self, dataset: &Dataset, sample: &[usize]) -> Result<Arc<dyn ListRule>>;
}

/// A stand-in for a list learner with error at most `ε`: the list always
/// holds the target on instances of its training sample, and misses it on
/// a fixed `ε`-fraction (chosen by hash) of the rest. The target's position
/// depends on the training sample.
#[derive(Clone)]
pub struct PlantedListLearner {
    target: Arc<dyn Classifier>,
    alphabet: usize,
    k: usize,
    epsilon: f64,
    salt: u64,
}

impl fmt::Debug for PlantedListLearner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlantedListLearner")
            .field("k", &self.k)
            .field("epsilon", &self.epsilon)
            .finish()
    }
}

fn unit_hash(x: &Instance, salt: u64) -> f64 {
    let mut bytes = x.to_string().into_bytes();
    bytes.extend_from_slice(&salt.to_le_bytes());
    (fnv1a(&bytes) >> 11) as f64 / (1u64 << 53) as f64
}

impl PlantedListLearner {
    pub fn new(target: Arc<dyn Classifier>, alphabet: usize, k: usize, epsilon: f64, salt: u64) -> Result<Self> {
        if k == 0 || k >= alphabet {
            return Err(Error::InvalidParams(format!(
                "need 1 ≤ k < |Y|, got k = {k}, |Y| = {alphabet}"
            )));
        }
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidParams(format!(
                "epsilon must lie in [0, 1), got {epsilon}"
            )));
        }
        Ok(PlantedListLearner {
            target,
            alphabet,
            k,
            epsilon,
            salt,
        })
    }

    /// Whether the list at `x` misses the target.
    pub fn misses(&self, x: &Instance) -> bool {
        unit_hash(x, self.salt) < self.epsilon
    }
}

struct PlantedList {
    learner: PlantedListLearner,
    shift: u64,
    seen: HashSet<Instance>,
}

impl ListRule for PlantedList {
    fn list(&self, x: &Instance) -> Vec<Label> {
        let l = &self.learner;
        let y = l.target.predict(x).index();
        let others = |n: usize| (1..=n).map(move |d| Label::from_index((y + d) % l.alphabet));
        if l.misses(x) && !self.seen.contains(x) {
            return others(l.k).collect();
        }
        let pos = (unit_hash(x, l.salt ^ self.shift ^ 0x9e37_79b9) * l.k as f64) as usize % l.k;
        let mut list: Vec<Label> = others(l.k - 1).collect();
        list.insert(pos, Label::from_index(y));
        list
    }
}

impl ListLearner for PlantedListLearner {
    fn name(&self) -> String {
        format!("planted-list(k={}, eps={})", self.k, self.epsilon)
    }

    fn list_size(&self) -> usize {
        self.k
    }

    fn train(&self, dataset: &Dataset, sample: &[usize]) -> Result<Arc<dyn ListRule>> {
        let bytes: Vec<u8> = sample.iter().flat_map(|i| (*i as u64).to_le_bytes()).collect();
        Ok(Arc::new(PlantedList {
            learner: self.clone(),
            shift: fnv1a(&bytes),
            seen: sample.iter().map(|&i| dataset.instance(i).clone()).collect(),
        }))
    }
}

/// Lists the first `k` distinct labels that class members consistent with
/// the sample assign to `x` (in row order).
#[derive(Clone, Debug)]
pub struct VersionSpaceList {
    class: Arc<FiniteClass>,
    k: usize,
}

impl VersionSpaceList {
    pub fn new(class: Arc<FiniteClass>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams("k must be positive".into()));
        }
        if class.is_empty() {
            return Err(Error::EmptyClass);
        }
        Ok(VersionSpaceList { class, k })
    }
}

struct VersionSpaceRule {
    class: Arc<FiniteClass>,
    rows: Vec<usize>,
    k: usize,
}

impl ListRule for VersionSpaceRule {
    fn list(&self, x: &Instance) -> Vec<Label> {
        let Some(c) = self.class.column_of(x) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for &r in &self.rows {
            let y = self.class.value(r, c);
            if !out.contains(&y) {
                out.push(y);
                if out.len() == self.k {
                    break;
                }
            }
        }
        out
    }
}

impl ListLearner for VersionSpaceList {
    fn name(&self) -> String {
        format!("version-space(k={})", self.k)
    }

    fn list_size(&self) -> usize {
        self.k
    }

    fn train(&self, dataset: &Dataset, sample: &[usize]) -> Result<Arc<dyn ListRule>> {
        let sub = Dataset::new(dataset.gather(sample), dataset.alphabet_size())?;
        let rows = self.class.consistent_rows(&sub)?;
        if rows.is_empty() {
            return Err(Error::NotRealizable);
        }
        Ok(Arc::new(VersionSpaceRule {
            class: Arc::clone(&self.class),
            rows,
            k: self.k,
        }))
    }
}

/// Parameters of the list-to-weak conversion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ListToWeakParams {
    pub k: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Candidate count, `⌈2k ln(2/δ)⌉`.
    pub q: usize,
    /// Validation size, `⌈10 ln(2q/δ) / (ε/k)²⌉`.
    pub r_val: usize,
}

impl ListToWeakParams {
    pub fn new(k: usize, epsilon: f64, delta: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams("k must be positive".into()));
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::InvalidParams(format!(
                "epsilon must lie in (0, 1/2), got {epsilon}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParams(format!("delta must lie in (0, 1), got {delta}")));
        }
        let q = (2.0 * k as f64 * (2.0 / delta).ln()).ceil() as usize;
        let eps_k = epsilon / k as f64;
        let r_val = (10.0 * (2.0 * q as f64 / delta).ln() / (eps_k * eps_k)).ceil() as usize;
        Ok(ListToWeakParams {
            k,
            epsilon,
            delta,
            q,
            r_val,
        })
    }

    /// Replaces the closed-form `q` and `r_val`.
    pub fn with_budget(mut self, q: usize, r_val: usize) -> Result<Self> {
        if q == 0 || r_val == 0 {
            return Err(Error::InvalidParams("q and r_val must be positive".into()));
        }
        self.q = q;
        self.r_val = r_val;
        Ok(self)
    }

    /// `(1 − 2ε)/k`.
    pub fn target_accuracy(&self) -> f64 {
        (1.0 - 2.0 * self.epsilon) / self.k as f64
    }

    /// Smallest pool that gives every candidate one training example.
    pub fn min_pool(&self) -> usize {
        self.q + self.r_val
    }
}

/// `h(x) = μ(x)_j`, repeating the last entry of short lists.
pub struct PositionClassifier {
    list: Arc<dyn ListRule>,
    j: usize,
}

impl PositionClassifier {
    pub fn new(list: Arc<dyn ListRule>, j: usize) -> Self {
        PositionClassifier { list, j }
    }

    pub fn position(&self) -> usize {
        self.j
    }
}

impl Classifier for PositionClassifier {
    fn predict(&self, x: &Instance) -> Label {
        let l = self.list.list(x);
        l.get(self.j).or(l.last()).copied().unwrap_or(Label(0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub position: usize,
    pub accuracy: f64,
}

/// Output of [`list_to_weak`].
#[derive(Clone)]
pub struct ListToWeakOutcome {
    pub classifier: Arc<PositionClassifier>,
    pub candidates: Vec<CandidateScore>,
    pub best: usize,
    pub validation_accuracy: f64,
}

impl fmt::Debug for ListToWeakOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ListToWeakOutcome")
            .field("candidates", &self.candidates)
            .field("best", &self.best)
            .field("validation_accuracy", &self.validation_accuracy)
            .finish()
    }
}

/// Runs the conversion on the whole dataset.
pub fn list_to_weak(
    learner: &dyn ListLearner,
    dataset: &Dataset,
    params: &ListToWeakParams,
    rng: &RandomStream,
) -> Result<ListToWeakOutcome> {
    let pool: Vec<usize> = (0..dataset.len()).collect();
    list_to_weak_on(learner, dataset, &pool, params, rng)
}

/// Splits `pool` into `q` consecutive training blocks of equal size and a
/// final validation block of `r_val`; candidate `i` trains on block `i`,
/// draws a position uniformly from `[k]` (stream `candidate-i`), and the
/// candidate with the best validation accuracy wins (lowest index on ties).
pub fn list_to_weak_on(
    learner: &dyn ListLearner,
    dataset: &Dataset,
    pool: &[usize],
    params: &ListToWeakParams,
    rng: &RandomStream,
) -> Result<ListToWeakOutcome> {
    let n = pool.len();
    if n < params.min_pool() {
        return Err(Error::InsufficientData {
            needed: params.min_pool(),
            available: n,
        });
    }
    let b = (n - params.r_val) / params.q;
    let validation: Vec<&LabeledExample> = pool[n - params.r_val..].iter().map(|&i| dataset.example(i)).collect();
    let runs: Vec<(Arc<PositionClassifier>, CandidateScore)> = (0..params.q)
        .into_par_iter()
        .map(|i| {
            let list = learner.train(dataset, &pool[i * b..(i + 1) * b])?;
            let j = rng.child(format!("candidate-{i}")).gen_range(0..params.k);
            let h = Arc::new(PositionClassifier::new(list, j));
            let hits = validation.iter().filter(|e| h.predict(&e.instance) == e.label).count();
            let score = CandidateScore {
                position: j,
                accuracy: hits as f64 / validation.len() as f64,
            };
            Ok((h, score))
        })
        .collect::<Result<_>>()?;
    let best = (0..runs.len())
        .max_by(|&a, &b| runs[a].1.accuracy.total_cmp(&runs[b].1.accuracy).then(b.cmp(&a)))
        .expect("q ≥ 1");
    Ok(ListToWeakOutcome {
        classifier: Arc::clone(&runs[best].0),
        validation_accuracy: runs[best].1.accuracy,
        candidates: runs.into_iter().map(|(_, s)| s).collect(),
        best,
    })
}

/// A list learner wrapped as a weak learner. Its randomness is derived from
/// the training sample, so a call is reproducible from the sample alone.
pub struct ListToWeakLearner {
    inner: Arc<dyn ListLearner>,
    params: ListToWeakParams,
    salt: u64,
}

impl ListToWeakLearner {
    pub fn new(inner: Arc<dyn ListLearner>, params: ListToWeakParams, salt: u64) -> Self {
        ListToWeakLearner { inner, params, salt }
    }

    pub fn params(&self) -> &ListToWeakParams {
        &self.params
    }
}

impl WeakLearner for ListToWeakLearner {
    fn name(&self) -> String {
        format!("list-to-weak({})", self.inner.name())
    }

    fn train(&self, req: &TrainRequest<'_>) -> Result<Arc<dyn Classifier>> {
        let bytes: Vec<u8> = req.sample.iter().flat_map(|i| (*i as u64).to_le_bytes()).collect();
        let rng = RandomStream::new(self.salt ^ fnv1a(&bytes));
        let out = list_to_weak_on(self.inner.as_ref(), req.dataset, req.sample, &self.params, &rng)?;
        Ok(out.classifier)
    }
}

/// `⌊k0 / (1 − 2ε0)⌋`.
pub fn boosted_list_size(k0: usize, eps0: f64) -> Result<usize> {
    if !(0.0..0.5).contains(&eps0) || k0 == 0 {
        return Err(Error::InvalidParams(format!(
            "need k0 ≥ 1 and 0 ≤ eps0 < 1/2, got {k0}, {eps0}"
        )));
    }
    Ok((k0 as f64 / (1.0 - 2.0 * eps0) + 1e-9).floor() as usize)
}

/// Settings for [`list_boost`] beyond `(k0, ε0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ListBoostConfig {
    pub delta: f64,
    /// Edge handed to weak-to-list; defaults to `(1 − 2ε0)/k0`.
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Error used for the conversion's validation size; defaults to `ε0`.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Overrides of `q`, `r_val`, `T` and the adapter's sample size.
    #[serde(default)]
    pub q: Option<usize>,
    #[serde(default)]
    pub r_val: Option<usize>,
    #[serde(default)]
    pub rounds: Option<usize>,
    #[serde(default)]
    pub m0: Option<usize>,
    pub seed: u64,
    #[serde(default)]
    pub audit: bool,
}

impl Default for ListBoostConfig {
    fn default() -> Self {
        ListBoostConfig {
            delta: 0.1,
            gamma: None,
            epsilon: None,
            q: None,
            r_val: None,
            rounds: None,
            m0: None,
            seed: 0,
            audit: false,
        }
    }
}

/// Output of [`list_boost`].
#[derive(Clone, Debug)]
pub struct ListBoostOutcome {
    pub list: ListFunction,
    pub record: CompressionRecord,
    /// Fixed output size `⌊k0/(1 − 2ε0)⌋`.
    pub list_size: usize,
    pub conversion: ListToWeakParams,
    pub weak: WeakToListParams<f64>,
    pub learner: WeakLearnerSpec,
    pub run: HedgeRun<f64>,
}

fn conversion_params(k0: usize, eps0: f64, config: &ListBoostConfig) -> Result<ListToWeakParams> {
    let conv = ListToWeakParams::new(k0, config.epsilon.unwrap_or(eps0).max(1e-6), config.delta)?;
    let (q, r_val) = (config.q.unwrap_or(conv.q), config.r_val.unwrap_or(conv.r_val));
    conv.with_budget(q, r_val)
}

/// The learner [`list_boost`] feeds to Hedge, exposed for replay.
pub fn list_boost_learner(
    list_learner: Arc<dyn ListLearner>,
    k0: usize,
    eps0: f64,
    config: &ListBoostConfig,
) -> Result<WeakLearnerSpec> {
    let conv = conversion_params(k0, eps0, config)?;
    let m0 = config.m0.unwrap_or(conv.q * 4 + conv.r_val);
    WeakLearnerSpec::new(Arc::new(ListToWeakLearner::new(list_learner, conv, config.seed)), m0)
}

/// List-to-weak with edge `(1 − 2ε0)/k0`, then weak-to-list with
/// threshold size `⌊k0/(1 − 2ε0)⌋ + 1`, giving lists of at most
/// `⌊k0/(1 − 2ε0)⌋` labels.
pub fn list_boost(
    list_learner: Arc<dyn ListLearner>,
    k0: usize,
    eps0: f64,
    dataset: &Dataset,
    config: &ListBoostConfig,
) -> Result<ListBoostOutcome> {
    let list_size = boosted_list_size(k0, eps0)?;
    if list_learner.list_size() != k0 {
        return Err(Error::InvalidParams(format!(
            "list learner emits {}-lists, expected {k0}",
            list_learner.list_size()
        )));
    }
    let spec = list_boost_learner(Arc::clone(&list_learner), k0, eps0, config)?;
    let conversion = conversion_params(k0, eps0, config)?;
    let gamma = config.gamma.unwrap_or((1.0 - 2.0 * eps0) / k0 as f64);
    let m = dataset.len();
    let mut weak = WeakToListParams::with_k(m, gamma, list_size + 1)?;
    if let Some(t) = config.rounds {
        weak = weak.with_rounds(m, t);
    }
    let out = weak_to_list(dataset, &spec, &weak, &RandomStream::new(config.seed), config.audit)?;
    Ok(ListBoostOutcome {
        list: out.list,
        record: out.record,
        list_size,
        conversion,
        weak,
        learner: spec,
        run: out.run,
    })
}

/// `Pr[y ∉ μ(x)]` over `examples`.
pub fn evaluate_list_error(mu: &ListFunction, examples: &[LabeledExample]) -> Result<f64> {
    if examples.is_empty() {
        return Err(Error::InvalidDataset("evaluation set is empty".into()));
    }
    let miss = examples.iter().filter(|e| !mu.contains(&e.instance, e.label)).count();
    Ok(miss as f64 / examples.len() as f64)
}

/// `Pr[y ∉ μ(x)]` under explicit weights.
pub fn weighted_list_error(mu: &ListFunction, examples: &[LabeledExample], weights: &[f64]) -> Result<f64> {
    if examples.len() != weights.len() || examples.is_empty() {
        return Err(Error::InvalidParams(
            "examples and weights must be non-empty and aligned".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::AllZeroWeights);
    }
    let miss: f64 = examples
        .iter()
        .zip(weights)
        .filter(|(e, _)| !mu.contains(&e.instance, e.label))
        .map(|(_, w)| w)
        .sum();
    Ok(miss / total)
}

/// A list table over a fixed set of instances.
pub fn tabulate(mu: &ListFunction, instances: &[Instance]) -> HashMap<Instance, Vec<Label>> {
    instances
        .iter()
        .map(|x| (x.clone(), mu.lookup(x).into_owned()))
        .collect()
}
