//! Boosting via Hedge with a hint list passed to the weak learner, and the
//! min-score label elimination built on its vote counts.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::domain::{sample_iid, Dataset, ExampleDistribution, Instance, Label, ListFunction, RandomStream};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::weak_learn::{audit_edge, BrgAuditLog, WeakHypothesis, WeakLearnerSpec};

/// `T = ⌈8 ln m / γ²⌉`, at least 1.
pub fn default_rounds<F: Scalar>(m: usize, gamma: F) -> usize {
    let t = (F::lit(8.0) * log_m::<F>(m) / (gamma * gamma)).ceil().as_f64();
    (t as usize).max(1)
}

/// `η = sqrt(ln m / (2T))`.
pub fn default_eta<F: Scalar>(m: usize, rounds: usize) -> F {
    (log_m::<F>(m) / F::from_count(2 * rounds.max(1))).sqrt()
}

/// `ln m`, with `m = 1` treated as `m = 2` so that step sizes stay positive.
pub(crate) fn log_m<F: Scalar>(m: usize) -> F {
    F::from_count(m.max(2)).ln()
}

/// Vote counts `H(x, y) = Σ_t 1[h_t(x) = y]` of a sequence of hypotheses.
///
/// Counts for training examples are cached; other instances are scored by
/// evaluating every hypothesis.
#[derive(Clone, Debug)]
pub struct ScoreTable {
    hypotheses: Vec<WeakHypothesis>,
    counts: Vec<Vec<(Label, u32)>>,
    index: HashMap<Instance, usize>,
}

fn bump(counts: &mut Vec<(Label, u32)>, y: Label) {
    match counts.iter_mut().find(|(l, _)| *l == y) {
        Some((_, c)) => *c += 1,
        None => {
            counts.push((y, 1));
            counts.sort_by_key(|(l, _)| *l);
        }
    }
}

impl ScoreTable {
    pub fn new(dataset: &Dataset) -> Self {
        let mut index = HashMap::with_capacity(dataset.len());
        for (i, e) in dataset.examples().iter().enumerate() {
            index.entry(e.instance.clone()).or_insert(i);
        }
        ScoreTable {
            hypotheses: Vec::new(),
            counts: vec![Vec::new(); dataset.len()],
            index,
        }
    }

    pub fn from_hypotheses(dataset: &Dataset, hypotheses: Vec<WeakHypothesis>) -> Self {
        let mut t = Self::new(dataset);
        for h in hypotheses {
            t.push(h);
        }
        t
    }

    /// Adds a hypothesis evaluated on the same dataset.
    pub fn push(&mut self, h: WeakHypothesis) {
        for (i, c) in self.counts.iter_mut().enumerate() {
            bump(c, h.predict_train(i));
        }
        self.hypotheses.push(h);
    }

    /// Number of hypotheses, `T`.
    pub fn rounds(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn hypotheses(&self) -> &[WeakHypothesis] {
        &self.hypotheses
    }

    pub fn score_train(&self, i: usize, y: Label) -> u32 {
        self.counts[i].iter().find(|(l, _)| *l == y).map_or(0, |(_, c)| *c)
    }

    /// Non-zero counts at `x`, ordered by label.
    pub fn scores(&self, x: &Instance) -> Vec<(Label, u32)> {
        if let Some(&i) = self.index.get(x) {
            return self.counts[i].clone();
        }
        let mut c = Vec::new();
        for h in &self.hypotheses {
            bump(&mut c, h.predict(x));
        }
        c
    }

    pub fn score(&self, x: &Instance, y: Label) -> u32 {
        match self.index.get(x) {
            Some(&i) => self.score_train(i, y),
            None => self.hypotheses.iter().filter(|h| h.predict(x) == y).count() as u32,
        }
    }

    /// Label with the highest count at `x` among `candidates`, lowest label
    /// on ties.
    pub fn argmax(&self, x: &Instance, candidates: &[Label]) -> Option<Label> {
        let s = self.scores(x);
        let get = |y: Label| s.iter().find(|(l, _)| *l == y).map_or(0, |(_, c)| *c);
        candidates
            .iter()
            .copied()
            .max_by(|&a, &b| get(a).cmp(&get(b)).then(b.cmp(&a)))
    }

    /// Index of the first training example with instance `x`.
    pub fn training_index(&self, x: &Instance) -> Option<usize> {
        self.index.get(x).copied()
    }
}

/// Hedge weights, kept as logarithms, plus the per-round trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct HedgeState<F = f64> {
    log_weights: Vec<F>,
    round: usize,
    eta: F,
    alphas: Vec<F>,
    entropies: Vec<F>,
    audit_pass: Vec<Option<bool>>,
}

/// One trace line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub t: usize,
    pub alpha_t: f64,
    pub weight_entropy: f64,
    pub audit_pass: Option<bool>,
}

impl<F: Scalar> HedgeState<F> {
    /// `w_1(i) = 1` for every example.
    pub fn new(m: usize, eta: F) -> Self {
        HedgeState {
            log_weights: vec![F::zero(); m],
            round: 0,
            eta,
            alphas: Vec::new(),
            entropies: Vec::new(),
            audit_pass: Vec::new(),
        }
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn eta(&self) -> F {
        self.eta
    }

    pub fn log_weights(&self) -> &[F] {
        &self.log_weights
    }

    /// `α_t` for every completed round.
    pub fn alphas(&self) -> &[F] {
        &self.alphas
    }

    /// `D_t`: the weights normalized after shifting by the largest log
    /// weight, so the heaviest example always has relative weight one.
    pub fn distribution(&self) -> Result<ExampleDistribution<F>> {
        let top = self.log_weights.iter().copied().fold(F::neg_infinity(), F::max);
        if !top.is_finite() {
            return Err(Error::WeightUnderflow { round: self.round });
        }
        let w: Vec<F> = self.log_weights.iter().map(|&l| (l - top).exp()).collect();
        ExampleDistribution::normalize(&w)
    }

    /// `w_{t+1}(i) = w_t(i) · exp(−η · 1[h_t(x_i) = y_i])`.
    fn update(&mut self, hits: &[bool], alpha: F, entropy: F, audit: Option<bool>) {
        for (lw, &hit) in self.log_weights.iter_mut().zip(hits) {
            if hit {
                *lw -= self.eta;
            }
        }
        self.alphas.push(alpha);
        self.entropies.push(entropy);
        self.audit_pass.push(audit);
        self.round += 1;
    }

    pub fn trace(&self) -> Vec<RoundTrace> {
        (0..self.round)
            .map(|t| RoundTrace {
                t: t + 1,
                alpha_t: self.alphas[t].as_f64(),
                weight_entropy: self.entropies[t].as_f64(),
                audit_pass: self.audit_pass[t],
            })
            .collect()
    }
}

/// How each round's hypothesis is audited: accuracy against
/// `(base + γ) · coverage`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeAudit<F = f64> {
    pub base: F,
    pub gamma: F,
}

impl<F: Scalar> EdgeAudit<F> {
    /// The BRG condition for `k`-lists.
    pub fn brg(k: usize, gamma: F) -> Self {
        EdgeAudit {
            base: F::one() / F::from_count(k.max(1)),
            gamma,
        }
    }

    /// Plain weak learning: accuracy at least `γ`.
    pub fn plain(gamma: F) -> Self {
        EdgeAudit { base: F::zero(), gamma }
    }
}

/// Output of [`run_hedge`].
#[derive(Clone, Debug)]
pub struct HedgeRun<F = f64> {
    pub scores: ScoreTable,
    pub state: HedgeState<F>,
    pub audits: BrgAuditLog<F>,
}

impl<F: Scalar> HedgeRun<F> {
    /// `ln m / η + η T + H(x_i, y_i) − Σ_t α_t` for every example. The
    /// regret inequality says these are all non-negative.
    pub fn regret_slack(&self, dataset: &Dataset) -> Vec<F> {
        let t = self.scores.rounds();
        let eta = self.state.eta;
        let base = log_m::<F>(dataset.len()) / eta + eta * F::from_count(t);
        let spent: F = self.state.alphas.iter().copied().sum();
        (0..dataset.len())
            .map(|i| base + F::from_count(self.scores.score_train(i, dataset.label(i)) as usize) - spent)
            .collect()
    }

    /// Checks the regret inequality with relative tolerance `rel`.
    pub fn regret_holds(&self, dataset: &Dataset, rel: F) -> bool {
        let spent: F = self.state.alphas.iter().copied().sum();
        let scale = spent.max(F::one());
        self.regret_slack(dataset).iter().all(|&s| s >= -rel * scale)
    }
}

/// Runs `rounds` rounds of Hedge on `dataset`, passing `mu` to the learner.
///
/// Each round normalizes the weights, draws `m0` indices i.i.d. from `D_t`,
/// trains, and multiplies the weight of every correctly classified example
/// by `exp(−η)`. `α_t` is measured on the full weighted dataset. Round `t`
/// draws from the child stream `round-t`.
pub fn run_hedge<F: Scalar>(
    dataset: &Dataset,
    mu: &ListFunction,
    learner: &WeakLearnerSpec,
    rounds: usize,
    eta: F,
    rng: &RandomStream,
    audit: Option<EdgeAudit<F>>,
) -> Result<HedgeRun<F>> {
    if rounds == 0 {
        return Err(Error::InvalidParams("Hedge needs at least one round".into()));
    }
    if !(eta > F::zero() && eta.is_finite()) {
        return Err(Error::InvalidParams(format!("eta must be positive, got {eta}")));
    }
    let m = dataset.len();
    let mut state = HedgeState::new(m, eta);
    let mut scores = ScoreTable::new(dataset);
    let mut audits = BrgAuditLog::new();
    for t in 0..rounds {
        let dist = state.distribution()?;
        let weights: Vec<f64> = dist.weights().iter().map(|w| w.as_f64()).collect();
        let sample = sample_iid(&dist, learner.m0(), &mut rng.child(format!("round-{t}")))?;
        let h = learner.fit(dataset, sample, mu, Some(&weights))?;
        let hits: Vec<bool> = (0..m).map(|i| h.predict_train(i) == dataset.label(i)).collect();
        let alpha = dist.mass_where(|i| hits[i]);
        let pass = match audit {
            Some(a) => {
                let entry = audit_edge(h.train_predictions(), dataset, &dist, mu, a.base, a.gamma)?;
                let pass = entry.pass;
                audits.push(entry);
                Some(pass)
            }
            None => None,
        };
        state.update(&hits, alpha, dist.entropy(), pass);
        scores.push(h);
    }
    Ok(HedgeRun { scores, state, audits })
}

/// The candidate with the lowest vote count at `x`, lowest label on ties.
pub fn eliminate_min_label(scores: &ScoreTable, x: &Instance, candidates: &[Label]) -> Result<Label> {
    let s = scores.scores(x);
    let get = |y: Label| s.iter().find(|(l, _)| *l == y).map_or(0, |(_, c)| *c);
    candidates
        .iter()
        .copied()
        .min_by(|&a, &b| get(a).cmp(&get(b)).then(a.cmp(&b)))
        .ok_or(Error::EmptyCandidates)
}
