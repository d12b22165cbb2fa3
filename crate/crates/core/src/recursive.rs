//! Recursive boosting: an initial hint followed by Hedge phases, each of
//! which removes at least one label from every training list, and the
//! adaptive-γ wrapper around it.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::compression::{CompressionRecord, PhaseRecord, PhaseTag, SlotRecord};
use crate::domain::{Dataset, Instance, Label, ListFunction, ListId, ListRule, RandomStream};
use crate::error::{Error, Result};
use crate::hedge::{default_eta, default_rounds, log_m, run_hedge, EdgeAudit, HedgeState, ScoreTable};
use crate::hint::{build_initial_hint, hint_list};
use crate::scalar::Scalar;
use crate::weak_learn::{BrgAuditLog, WeakHypothesis, WeakLearnerSpec};

/// Parameters of one boosting run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct BoostConfig<F = f64> {
    pub gamma: F,
    /// Hedge rounds per phase, `T`.
    pub rounds: usize,
    pub eta: F,
    /// Maximal hint length.
    pub p: usize,
    /// Overrides the learner's own sample size when set.
    #[serde(default)]
    pub m0: Option<usize>,
    pub delta: F,
    pub seed: u64,
    /// Audit every weak-learner call.
    #[serde(default = "yes")]
    pub audit: bool,
}

fn yes() -> bool {
    true
}

/// `p = ⌈ln m / γ⌉`, at least 1.
pub fn default_hint_length<F: Scalar>(m: usize, gamma: F) -> usize {
    ((log_m::<F>(m) / gamma).ceil().as_f64() as usize).max(1)
}

impl<F: Scalar> BoostConfig<F> {
    /// Defaults for a sample of size `m`: `T = ⌈8 ln m/γ²⌉`,
    /// `η = sqrt(ln m/(2T))`, `p = ⌈ln m/γ⌉`, `δ = 0.1`, seed 0.
    pub fn for_sample(m: usize, gamma: F) -> Result<Self> {
        check_gamma(gamma)?;
        let rounds = default_rounds(m, gamma);
        Ok(BoostConfig {
            gamma,
            rounds,
            eta: default_eta(m, rounds),
            p: default_hint_length(m, gamma),
            m0: None,
            delta: F::lit(0.1),
            seed: 0,
            audit: true,
        })
    }

    /// Same seed, `m0`, `δ` and auditing, with `T`, `η` and `p` recomputed.
    pub fn with_gamma(&self, m: usize, gamma: F) -> Result<Self> {
        Ok(BoostConfig {
            m0: self.m0,
            delta: self.delta,
            seed: self.seed,
            audit: self.audit,
            ..Self::for_sample(m, gamma)?
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)?;
        if self.rounds == 0 || self.p == 0 {
            return Err(Error::InvalidParams("rounds and p must be positive".into()));
        }
        if !(self.eta > F::zero() && self.eta.is_finite()) {
            return Err(Error::InvalidParams(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.delta > F::zero() && self.delta < F::one()) {
            return Err(Error::InvalidParams(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if self.m0 == Some(0) {
            return Err(Error::InvalidParams("m0 must be at least 1".into()));
        }
        Ok(())
    }
}

fn check_gamma<F: Scalar>(gamma: F) -> Result<()> {
    if gamma > F::zero() && gamma < F::one() {
        Ok(())
    } else {
        Err(Error::InvalidGamma(gamma.as_f64()))
    }
}

/// Keeps the labels of the previous list whose vote count clears `T/k`,
/// highest count first.
pub(crate) struct ShrinkRule {
    prev: ListFunction,
    scores: ScoreTable,
    k: usize,
}

impl ShrinkRule {
    /// Labels with a zero count never clear the threshold, so only voted
    /// labels are examined; a universal previous list admits all of them.
    fn keep(&self, x: &Instance) -> Vec<Label> {
        let t = self.scores.rounds() as u64;
        let prev = (!self.prev.is_universal()).then(|| self.prev.lookup(x));
        let mut kept: Vec<(Label, u64)> = self
            .scores
            .scores(x)
            .into_iter()
            .map(|(y, c)| (y, c as u64))
            .filter(|&(y, h)| h * self.k as u64 > t && prev.as_ref().is_none_or(|p| p.contains(&y)))
            .collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        kept.into_iter().map(|(y, _)| y).collect()
    }
}

impl ListRule for ShrinkRule {
    fn list(&self, x: &Instance) -> Vec<Label> {
        self.keep(x)
    }
}

/// `{y ∈ prev(x) : H(x, y) > T/k}`, highest count first. At most `k − 1`
/// labels can clear the threshold, since the counts at `x` sum to `T`.
pub(crate) fn shrink(
    dataset: &Dataset,
    prev: &ListFunction,
    scores: &ScoreTable,
    k: usize,
    id: ListId,
) -> Result<ListFunction> {
    if k < 2 {
        return Err(Error::InvalidParams(format!(
            "threshold list size must be at least 2, got {k}"
        )));
    }
    let rule = ShrinkRule {
        prev: prev.clone(),
        scores: scores.clone(),
        k,
    };
    let mut cached: HashMap<Instance, Vec<Label>> = HashMap::with_capacity(dataset.len());
    for e in dataset.examples() {
        if !cached.contains_key(&e.instance) {
            cached.insert(e.instance.clone(), rule.keep(&e.instance));
        }
    }
    ListFunction::composed(id, k - 1, cached, Arc::new(rule))
}

/// Diagnostics for one stage of the chain (stage 0 is the hint).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub phase: usize,
    /// `p′` for the hint, otherwise the `k` of the threshold.
    pub k: usize,
    pub calls: usize,
    pub audit_failures: usize,
    /// Longest training list after this stage.
    pub max_train_list: usize,
}

/// `μ_1, …, μ_final` with the score table of every Hedge phase.
#[derive(Clone, Debug)]
pub struct StagedListChain {
    lists: Vec<ListFunction>,
    tables: Vec<ScoreTable>,
    hint: Vec<WeakHypothesis>,
}

impl StagedListChain {
    /// `lists` must hold exactly one more entry than `tables`.
    pub fn new(hint: Vec<WeakHypothesis>, lists: Vec<ListFunction>, tables: Vec<ScoreTable>) -> Result<Self> {
        if lists.len() != tables.len() + 1 {
            return Err(Error::InvalidParams(format!(
                "{} lists do not fit {} phases",
                lists.len(),
                tables.len()
            )));
        }
        Ok(StagedListChain { lists, tables, hint })
    }

    pub fn lists(&self) -> &[ListFunction] {
        &self.lists
    }

    pub fn final_list(&self) -> &ListFunction {
        self.lists.last().expect("chain has at least the hint")
    }

    pub fn score_tables(&self) -> &[ScoreTable] {
        &self.tables
    }

    pub fn hint_hypotheses(&self) -> &[WeakHypothesis] {
        &self.hint
    }

    pub fn phases_run(&self) -> usize {
        self.tables.len()
    }

    pub fn predict(&self, x: &Instance) -> Label {
        predict_final(self, x)
    }

    pub fn predict_all(&self, dataset: &Dataset) -> Vec<Label> {
        dataset.examples().iter().map(|e| self.predict(&e.instance)).collect()
    }

    /// Hypotheses in training order, hint first.
    pub fn hypotheses(&self) -> impl Iterator<Item = &WeakHypothesis> {
        self.hint.iter().chain(self.tables.iter().flat_map(|t| t.hypotheses()))
    }
}

/// `H̄(x)`: the single label of the final list, or else the highest-scoring
/// label of the last phase's input list (lowest label on ties), walking back
/// through earlier phases while those lists are empty.
pub fn predict_final(chain: &StagedListChain, x: &Instance) -> Label {
    let last = chain.final_list().lookup(x);
    if last.len() == 1 {
        return last[0];
    }
    for j in (0..chain.tables.len()).rev() {
        let input = chain.lists[j].lookup(x);
        if let Some(y) = chain.tables[j].argmax(x, &input) {
            return y;
        }
    }
    chain.lists[0].lookup(x).first().copied().unwrap_or(Label(0))
}

/// Output of [`recursive_boost`].
#[derive(Clone, Debug)]
pub struct BoostOutcome<F = f64> {
    pub chain: StagedListChain,
    pub record: CompressionRecord,
    pub config: BoostConfig<F>,
    /// Audits of the hint rounds (plain edge `γ`).
    pub hint_audits: BrgAuditLog<F>,
    /// Audits of the Hedge rounds (BRG at the phase's `k`).
    pub audits: BrgAuditLog<F>,
    pub hedge_states: Vec<HedgeState<F>>,
    pub summaries: Vec<PhaseSummary>,
    pub oracle_calls: usize,
}

impl<F: Scalar> BoostOutcome<F> {
    /// Realized hint length `p′`.
    pub fn hint_length(&self) -> usize {
        self.chain.hint.len()
    }

    pub fn compression_size(&self) -> usize {
        crate::compression::compression_size(&self.record)
    }

    pub fn all_audits_passed(&self) -> bool {
        self.hint_audits.all_passed() && self.audits.all_passed()
    }

    pub fn audit_pass_rate(&self) -> f64 {
        let total = self.hint_audits.len() + self.audits.len();
        if total == 0 {
            return 1.0;
        }
        let failed = self.hint_audits.failures() + self.audits.failures();
        (total - failed) as f64 / total as f64
    }

    /// `H̄(x) = y` on every training pair.
    pub fn consistent(&self, dataset: &Dataset) -> bool {
        dataset
            .examples()
            .iter()
            .all(|e| self.chain.predict(&e.instance) == e.label)
    }
}

fn effective_learner<F: Scalar>(learner: &WeakLearnerSpec, config: &BoostConfig<F>) -> Result<WeakLearnerSpec> {
    match config.m0 {
        Some(m0) if m0 != learner.m0() => WeakLearnerSpec::new(Arc::clone(learner.learner()), m0),
        _ => Ok(learner.clone()),
    }
}

fn max_train_list(dataset: &Dataset, mu: &ListFunction) -> usize {
    dataset
        .examples()
        .iter()
        .map(|e| mu.lookup(&e.instance).len())
        .max()
        .unwrap_or(0)
}

fn all_singletons(dataset: &Dataset, mu: &ListFunction) -> bool {
    dataset.examples().iter().all(|e| mu.lookup(&e.instance).len() == 1)
}

pub(crate) fn first_loss(dataset: &Dataset, mu: &ListFunction) -> Option<usize> {
    (0..dataset.len()).find(|&i| !mu.contains(dataset.instance(i), dataset.label(i)))
}

fn slots(hyps: &[WeakHypothesis]) -> Vec<SlotRecord> {
    hyps.iter().map(|h| h.record().clone()).collect()
}

/// Builds the hint, then for `j = 1, …, p′−1` runs Hedge with `μ_j` and
/// keeps the labels with `H_j(x, y) > T/(p′−j+1)`, where `p′` is the
/// realized hint length. Stops as soon as every training list is a single
/// label.
///
/// Fails with `PhaseFailure` as soon as a training label leaves its list
/// (phase 0 when the hint does not cover it).
pub fn recursive_boost<F: Scalar>(
    dataset: &Dataset,
    learner: &WeakLearnerSpec,
    config: &BoostConfig<F>,
) -> Result<BoostOutcome<F>> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::InvalidDataset("empty dataset".into()));
    }
    let learner = effective_learner(learner, config)?;
    let rng = RandomStream::new(config.seed);
    let audit = config.audit.then_some(config.gamma);
    let hint = build_initial_hint(dataset, &learner, config.p, &rng.child("hint"), audit)?;
    if let Some(&i) = hint.residual.first() {
        return Err(Error::PhaseFailure { phase: 0, example: i });
    }
    let p_real = hint.rounds();
    let mut record = CompressionRecord::new(dataset.len());
    record.push(PhaseRecord {
        tag: PhaseTag::Hint,
        list_ref: None,
        list_size: p_real,
        slots: slots(&hint.hypotheses),
    });
    let mut summaries = vec![PhaseSummary {
        phase: 0,
        k: p_real,
        calls: p_real,
        audit_failures: hint.audits.failures(),
        max_train_list: max_train_list(dataset, &hint.list),
    }];
    let mut lists = vec![hint.list.clone()];
    let mut tables = Vec::new();
    let mut states = Vec::new();
    let mut audits = BrgAuditLog::new();
    let mut calls = p_real;
    for j in 1..p_real {
        let mu = lists.last().expect("non-empty");
        if all_singletons(dataset, mu) {
            break;
        }
        let k = p_real - j + 1;
        let phase_audit = config.audit.then(|| EdgeAudit::brg(k, config.gamma));
        let run = run_hedge(
            dataset,
            mu,
            &learner,
            config.rounds,
            config.eta,
            &rng.child(format!("phase-{j}")),
            phase_audit,
        )?;
        calls += config.rounds;
        let next = shrink(dataset, mu, &run.scores, k, ListId::new(format!("phase-{j}")))?;
        if let Some(i) = first_loss(dataset, &next) {
            return Err(Error::PhaseFailure { phase: j, example: i });
        }
        record.push(PhaseRecord {
            tag: PhaseTag::Hedge { j },
            list_ref: Some(j - 1),
            list_size: k,
            slots: slots(run.scores.hypotheses()),
        });
        summaries.push(PhaseSummary {
            phase: j,
            k,
            calls: config.rounds,
            audit_failures: run.audits.failures(),
            max_train_list: max_train_list(dataset, &next),
        });
        audits.extend(run.audits);
        states.push(run.state);
        tables.push(run.scores);
        lists.push(next);
    }
    Ok(BoostOutcome {
        chain: StagedListChain::new(hint.hypotheses, lists, tables)?,
        record,
        config: config.clone(),
        hint_audits: hint.audits,
        audits,
        hedge_states: states,
        summaries,
        oracle_calls: calls,
    })
}

/// Runs [`recursive_boost`] at `γ_init`, halving γ after every
/// `PhaseFailure` until a run succeeds or γ drops below `γ_min`
/// (default `1/m`). Returns the outcome and the γ that produced it.
pub fn adaptive_gamma<F: Scalar>(
    dataset: &Dataset,
    learner: &WeakLearnerSpec,
    base: &BoostConfig<F>,
    gamma_init: F,
    gamma_min: Option<F>,
) -> Result<(BoostOutcome<F>, F)> {
    check_gamma(gamma_init)?;
    let m = dataset.len();
    let floor = gamma_min.unwrap_or_else(|| F::one() / F::from_count(m.max(1)));
    let mut gamma = gamma_init;
    while gamma >= floor {
        let config = base.with_gamma(m, gamma)?;
        match recursive_boost(dataset, learner, &config) {
            Ok(out) => return Ok((out, gamma)),
            Err(Error::PhaseFailure { .. }) => gamma /= F::lit(2.0),
            Err(e) => return Err(e),
        }
    }
    Err(Error::GammaExhausted {
        gamma_min: floor.as_f64(),
    })
}

pub(crate) fn replay_slot(
    dataset: &Dataset,
    learner: &WeakLearnerSpec,
    mu: &ListFunction,
    slot: &SlotRecord,
    phase: usize,
    s: usize,
) -> Result<WeakHypothesis> {
    let h = learner.fit(dataset, slot.indices.clone(), mu, None)?;
    if h.record().fingerprint != slot.fingerprint {
        return Err(Error::NonDeterministicLearner { phase, slot: s });
    }
    Ok(h)
}

/// Rebuilds the chain of a boosting record by retraining every slot on its
/// stored indices.
pub(crate) fn replay_boost(
    record: &CompressionRecord,
    dataset: &Dataset,
    learner: &WeakLearnerSpec,
) -> Result<StagedListChain> {
    if !learner.deterministic() {
        return Err(Error::NonDeterministicLearner { phase: 0, slot: 0 });
    }
    record.validate()?;
    if record.m != dataset.len() {
        return Err(Error::MalformedRecord(format!(
            "record was built on {} examples, dataset has {}",
            record.m,
            dataset.len()
        )));
    }
    let (first, rest) = record
        .phases
        .split_first()
        .ok_or_else(|| Error::MalformedRecord("record has no phases".into()))?;
    if first.tag != PhaseTag::Hint {
        return Err(Error::MalformedRecord("first phase is not a hint".into()));
    }
    let universal = ListFunction::universal(dataset.alphabet_size());
    let mut hint = Vec::new();
    for (s, slot) in first.slots.iter().enumerate() {
        hint.push(replay_slot(dataset, learner, &universal, slot, 0, s)?);
    }
    let mut lists = vec![hint_list(dataset, &hint)?];
    let mut tables = Vec::new();
    for (offset, phase) in rest.iter().enumerate() {
        let p = offset + 1;
        let j = match phase.tag {
            PhaseTag::Hedge { j } => j,
            other => {
                return Err(Error::MalformedRecord(format!(
                    "unexpected {other:?} phase in a boosting record"
                )))
            }
        };
        if phase.list_size < 2 {
            return Err(Error::MalformedRecord(format!(
                "phase {p} has list size {}",
                phase.list_size
            )));
        }
        let mu = lists.last().expect("non-empty");
        let mut table = ScoreTable::new(dataset);
        for (s, slot) in phase.slots.iter().enumerate() {
            let h = replay_slot(dataset, learner, mu, slot, p, s)?;
            for _ in 1..slot.repeat {
                table.push(h.clone());
            }
            table.push(h);
        }
        let next = shrink(dataset, mu, &table, phase.list_size, ListId::new(format!("phase-{j}")))?;
        tables.push(table);
        lists.push(next);
    }
    StagedListChain::new(hint, lists, tables)
}
