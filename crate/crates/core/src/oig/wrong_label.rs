use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::predict::OneInclusionLearner;
use crate::compression::SlotRecord;
use crate::domain::{fingerprint, sample_iid, Dataset, ExampleDistribution, Label, RandomStream};
use crate::error::{Error, Result};

/// Budgets of the wrong-label game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    /// Multiplicative-weights rounds.
    pub iterations: usize,
    /// Random candidates per best response (plus one heaviest-first).
    pub search_budget: usize,
    /// Fresh vote draws before giving up.
    pub resamples: usize,
}

impl Default for GameParams {
    fn default() -> Self {
        GameParams {
            iterations: 40,
            search_budget: 32,
            resamples: 5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct WrongLabelOutcome {
    /// `μ(x) ⊆ [p]` of size `p − 1` for every class column.
    pub lists: Vec<Vec<Label>>,
    /// Distinct voting subsets with their multiplicities.
    pub slots: Vec<SlotRecord>,
    pub s: usize,
    pub votes: usize,
    pub game_rounds: usize,
    /// A single subset made no mistake on the whole sample.
    pub zero_loss: bool,
}

/// `⌈8p² ln(2m)⌉`.
pub fn vote_count(p: usize, m: usize) -> usize {
    (8.0 * (p * p) as f64 * ((2 * m.max(1)) as f64).ln()).ceil() as usize
}

/// `f_U(x)`: the lowest label of `[p]` missing from the `(p−1)`-list that
/// the one-inclusion learner builds from `U`, for every class column.
pub(crate) fn wrong_labels(
    learner: &OneInclusionLearner,
    dataset: &Dataset,
    cols: &[usize],
    subset: &[usize],
    p: usize,
) -> Result<Vec<Label>> {
    let labeled: Vec<(usize, Label)> = subset.iter().map(|&i| (cols[i], dataset.label(i))).collect();
    (0..learner.class().n_columns())
        .map(|c| {
            let list = learner.predict_columns(&labeled, c)?;
            Ok((0..p)
                .map(Label::from_index)
                .find(|y| !list.contains(y))
                .unwrap_or(Label::from_index(p - 1)))
        })
        .collect()
}

/// `μ(x) = [p] ∖ {argmax_y F̄(x, y)}` from weighted votes, lowest argmax.
pub(crate) fn lists_from_votes(votes: &[(Vec<Label>, usize)], n: usize, p: usize) -> Vec<Vec<Label>> {
    (0..n)
        .map(|c| {
            let mut f = vec![0usize; p];
            for (w, r) in votes {
                f[w[c].index()] += r;
            }
            let top = (0..p).max_by(|&a, &b| f[a].cmp(&f[b]).then(b.cmp(&a))).expect("p ≥ 1");
            (0..p).filter(|&y| y != top).map(Label::from_index).collect()
        })
        .collect()
}

fn violations(lists: &[Vec<Label>], dataset: &Dataset, cols: &[usize]) -> usize {
    (0..dataset.len())
        .filter(|&i| !lists[cols[i]].contains(&dataset.label(i)))
        .count()
}

/// Learns `(p−1)`-lists that contain every training label.
///
/// An adversary reweights the sample multiplicatively; each round the
/// learner answers with the best of a heaviest-first subset and
/// `search_budget` subsets of size `s = min(4pd, m)` drawn from the
/// adversary's distribution, scored by the weight of examples whose label
/// `f_U` names. The answers form the mixed strategy; `⌈8p² ln(2m)⌉` votes
/// drawn from it are averaged and the most-voted label is removed.
pub fn wrong_label_learner(
    learner: &OneInclusionLearner,
    dataset: &Dataset,
    p: usize,
    d: usize,
    params: &GameParams,
    rng: &RandomStream,
) -> Result<WrongLabelOutcome> {
    if p < 2 {
        return Err(Error::InvalidParams("wrong-label lists need p ≥ 2".into()));
    }
    if learner.k() != p - 1 {
        return Err(Error::InvalidParams(format!(
            "learner emits {}-lists, need {}",
            learner.k(),
            p - 1
        )));
    }
    if dataset.is_empty() {
        return Err(Error::InvalidDataset("empty dataset".into()));
    }
    let cols = learner.class().columns_for(dataset)?;
    let m = dataset.len();
    let n = learner.class().n_columns();
    let s = (4 * p * d).min(m);
    let ell = vote_count(p, m);
    let loss_of = |w: &[Label]| -> Vec<bool> { (0..m).map(|i| w[cols[i]] == dataset.label(i)).collect() };

    let mut weights = vec![1.0f64; m];
    let eta = ((m.max(2) as f64).ln() / params.iterations.max(1) as f64)
        .sqrt()
        .min(1.0);
    let mut answers: Vec<(Vec<usize>, Vec<Label>)> = Vec::new();
    for t in 0..params.iterations.max(1) {
        let dist = ExampleDistribution::<f64>::normalize(&weights)?;
        let mut r = rng.child(format!("game-{t}"));
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
        let mut candidates = vec![order[..s].to_vec()];
        for _ in 0..params.search_budget {
            candidates.push(sample_iid(&dist, s, &mut r)?);
        }
        let scored: Vec<(Vec<Label>, f64)> = candidates
            .par_iter()
            .map(|u| {
                let w = wrong_labels(learner, dataset, &cols, u, p)?;
                let loss = loss_of(&w)
                    .iter()
                    .enumerate()
                    .filter(|(_, &l)| l)
                    .map(|(i, _)| dist.prob(i))
                    .sum();
                Ok((w, loss))
            })
            .collect::<Result<_>>()?;
        let best = (0..scored.len())
            .min_by(|&a, &b| scored[a].1.total_cmp(&scored[b].1).then(a.cmp(&b)))
            .expect("at least one candidate");
        let (w, _) = scored[best].clone();
        let losses = loss_of(&w);
        if losses.iter().all(|&l| !l) {
            let lists = lists_from_votes(&[(w.clone(), ell)], n, p);
            let mut slot = SlotRecord::new(candidates[best].clone(), fingerprint(&w));
            slot.repeat = ell;
            return Ok(WrongLabelOutcome {
                lists,
                slots: vec![slot],
                s,
                votes: ell,
                game_rounds: t + 1,
                zero_loss: true,
            });
        }
        for (wt, l) in weights.iter_mut().zip(&losses) {
            if *l {
                *wt *= eta.exp();
            }
        }
        let top = weights.iter().copied().fold(0.0, f64::max);
        weights.iter_mut().for_each(|w| *w /= top);
        answers.push((candidates[best].clone(), w));
    }
    let mut worst = m;
    for attempt in 0..params.resamples.max(1) {
        let mut r = rng.child(format!("votes-{attempt}"));
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for _ in 0..ell {
            *counts.entry(r.gen_range(0..answers.len())).or_default() += 1;
        }
        let votes: Vec<(Vec<Label>, usize)> = counts.iter().map(|(&a, &c)| (answers[a].1.clone(), c)).collect();
        let lists = lists_from_votes(&votes, n, p);
        let v = violations(&lists, dataset, &cols);
        if v == 0 {
            let slots = counts
                .iter()
                .map(|(&a, &c)| {
                    let mut slot = SlotRecord::new(answers[a].0.clone(), fingerprint(&answers[a].1));
                    slot.repeat = c;
                    slot
                })
                .collect();
            return Ok(WrongLabelOutcome {
                lists,
                slots,
                s,
                votes: ell,
                game_rounds: answers.len(),
                zero_loss: false,
            });
        }
        worst = worst.min(v);
    }
    Err(Error::GameNotConverged { violations: worst })
}

/// Recomputes the lists of a recorded game.
pub(crate) fn replay_wrong_label(
    learner: &OneInclusionLearner,
    dataset: &Dataset,
    p: usize,
    slots: &[SlotRecord],
    phase: usize,
) -> Result<Vec<Vec<Label>>> {
    let cols = learner.class().columns_for(dataset)?;
    let mut votes = Vec::new();
    for (s, slot) in slots.iter().enumerate() {
        let w = wrong_labels(learner, dataset, &cols, &slot.indices, p)?;
        if fingerprint(&w) != slot.fingerprint {
            return Err(Error::NonDeterministicLearner { phase, slot: s });
        }
        votes.push((w, slot.repeat));
    }
    Ok(lists_from_votes(&votes, learner.class().n_columns(), p))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::domain::LabeledExample;
    use crate::oig::{FiniteClass, OrientationStrategy};

    fn planted(class: &FiniteClass, row: usize, m: usize, seed: u64) -> Dataset {
        let mut r = RandomStream::new(seed);
        Dataset::new(
            (0..m)
                .map(|_| {
                    let c = r.gen_range(0..class.n_columns());
                    LabeledExample::new(class.columns()[c].clone(), class.value(row, c))
                })
                .collect(),
            class.alphabet(),
        )
        .unwrap()
    }

    #[test]
    fn vote_counts() {
        assert_eq!(vote_count(2, 10), (32.0 * 20f64.ln()).ceil() as usize);
    }

    #[test]
    fn binary_case_gives_correct_labels() {
        let rows: Vec<Vec<u32>> = (0..=6).map(|t| (0..6).map(|i| u32::from(i >= t)).collect()).collect();
        let refs: Vec<&[u32]> = rows.iter().map(|r| r.as_slice()).collect();
        let c = Arc::new(FiniteClass::from_table(&refs, 2).unwrap());
        let ds = planted(&c, 2, 12, 1);
        let l = OneInclusionLearner::new(Arc::clone(&c), 1, OrientationStrategy::Flow).unwrap();
        let out = wrong_label_learner(&l, &ds, 2, 1, &GameParams::default(), &RandomStream::new(3)).unwrap();
        let cols = c.columns_for(&ds).unwrap();
        for (i, e) in ds.examples().iter().enumerate() {
            assert_eq!(out.lists[cols[i]], vec![e.label]);
        }
        let back = replay_wrong_label(&l, &ds, 2, &out.slots, 1).unwrap();
        assert_eq!(back, out.lists);
    }

    #[test]
    fn three_labels_consistent() {
        let c = Arc::new(
            FiniteClass::from_table(
                &[
                    &[0, 1, 2, 0, 1, 2],
                    &[1, 1, 2, 0, 2, 2],
                    &[2, 0, 2, 1, 1, 0],
                    &[0, 0, 1, 1, 2, 2],
                    &[1, 2, 0, 1, 0, 2],
                ],
                3,
            )
            .unwrap(),
        );
        let ds = planted(&c, 3, 30, 2);
        let l = OneInclusionLearner::new(Arc::clone(&c), 2, OrientationStrategy::Flow).unwrap();
        let out = wrong_label_learner(&l, &ds, 3, 1, &GameParams::default(), &RandomStream::new(4)).unwrap();
        let cols = c.columns_for(&ds).unwrap();
        for (i, e) in ds.examples().iter().enumerate() {
            assert!(out.lists[cols[i]].contains(&e.label));
            assert_eq!(out.lists[cols[i]].len(), 2);
        }
    }
}
