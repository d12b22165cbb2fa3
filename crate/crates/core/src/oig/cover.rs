use std::collections::HashMap;

use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::orientation::next_combination;
use super::predict::OneInclusionLearner;
use crate::compression::SlotRecord;
use crate::domain::{dedup_ordered, fingerprint, Dataset, Label, RandomStream};
use crate::error::{Error, Result};

/// Default number of candidate subsets tried per cover round.
pub const DEFAULT_SEARCH_BUDGET: u64 = 20_000;

/// Flattens per-column lists (separated by a marker) for fingerprinting.
pub(crate) fn list_fingerprint(lists: &[Vec<Label>]) -> u64 {
    let mut flat = Vec::new();
    for l in lists {
        flat.extend_from_slice(l);
        flat.push(Label(u32::MAX));
    }
    fingerprint(&flat)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverRound {
    /// Dataset indices of the chosen subset.
    pub subset: Vec<usize>,
    pub residual_before: usize,
    pub covered: usize,
    pub tried: usize,
    pub exhaustive: bool,
}

#[derive(Clone, Debug)]
pub struct CoverOutcome {
    /// One list per class column: the union of the round lists.
    pub lists: Vec<Vec<Label>>,
    pub rounds: Vec<CoverRound>,
    pub slots: Vec<SlotRecord>,
    /// Round cap `⌈(d+1) ln(2m)⌉`.
    pub q: usize,
    /// Declared list size `k·q`.
    pub p: usize,
    pub alpha: f64,
}

/// `⌈(d+1) ln(2m)⌉`.
pub fn cover_rounds(d: usize, m: usize) -> usize {
    (((d + 1) as f64) * ((2 * m.max(1)) as f64).ln()).ceil().max(1.0) as usize
}

/// The list each column receives from a labeled subset.
pub(crate) fn subset_lists(
    learner: &OneInclusionLearner,
    dataset: &Dataset,
    cols: &[usize],
    subset: &[usize],
) -> Result<Vec<Vec<Label>>> {
    let labeled: Vec<(usize, Label)> = subset.iter().map(|&i| (cols[i], dataset.label(i))).collect();
    (0..learner.class().n_columns())
        .map(|c| learner.predict_columns(&labeled, c))
        .collect()
}

/// Union of the lists of several subsets, in round order.
pub(crate) fn union_lists(per_round: &[Vec<Vec<Label>>], n: usize) -> Vec<Vec<Label>> {
    (0..n)
        .map(|c| dedup_ordered(per_round.iter().flat_map(|r| r[c].iter().copied())))
        .collect()
}

fn coverage(lists: &[Vec<Label>], dataset: &Dataset, cols: &[usize], residual: &[usize]) -> usize {
    residual
        .iter()
        .filter(|&&i| lists[cols[i]].contains(&dataset.label(i)))
        .count()
}

/// Greedy cover: each round looks for `d` residual examples (all of them
/// when fewer remain) whose
/// one-inclusion lists contain the labels of at least a `1/(d+1)` share of
/// the residual, then drops the covered examples. Subsets are enumerated
/// in order when there are at most `budget` of them, otherwise `budget`
/// random ones are tried (stream `cover-j`). Stops early once everything
/// is covered.
pub fn initial_cover(
    learner: &OneInclusionLearner,
    dataset: &Dataset,
    d: usize,
    budget: u64,
    rng: &RandomStream,
) -> Result<CoverOutcome> {
    let cols = learner.class().columns_for(dataset)?;
    let m = dataset.len();
    let n = learner.class().n_columns();
    let q = cover_rounds(d, m);
    let alpha = 1.0 / (d + 1) as f64;
    let mut residual: Vec<usize> = (0..m).collect();
    let mut per_round = Vec::new();
    let mut rounds = Vec::new();
    let mut slots = Vec::new();
    for j in 0..q {
        if residual.is_empty() {
            break;
        }
        let need = residual.len().div_ceil(d + 1);
        // A residual smaller than d is used whole.
        let size = d.min(residual.len());
        let total = binomial(residual.len(), size);
        let exhaustive = total <= budget as f64;
        let candidates: Vec<Vec<usize>> = if exhaustive {
            let mut out = Vec::new();
            let mut pick: Vec<usize> = (0..size).collect();
            loop {
                out.push(pick.iter().map(|&i| residual[i]).collect());
                if size == 0 || !next_combination(&mut pick, residual.len()) {
                    break;
                }
            }
            out
        } else {
            let mut r = rng.child(format!("cover-{j}"));
            (0..budget)
                .map(|_| {
                    let mut s: Vec<usize> = sample_indices(&mut r, residual.len(), size)
                        .into_iter()
                        .map(|i| residual[i])
                        .collect();
                    s.sort_unstable();
                    s
                })
                .collect()
        };
        let mut best = (0usize, 0usize);
        let mut found = None;
        let mut tried = 0;
        for chunk in candidates.chunks(64) {
            let scores: Vec<Option<(Vec<Vec<Label>>, usize)>> = chunk
                .par_iter()
                .map(|s| match subset_lists(learner, dataset, &cols, s) {
                    Ok(lists) => {
                        let c = coverage(&lists, dataset, &cols, &residual);
                        Ok(Some((lists, c)))
                    }
                    Err(Error::NotRealizable) => Ok(None),
                    Err(e) => Err(e),
                })
                .collect::<Result<_>>()?;
            for (off, s) in scores.into_iter().enumerate() {
                tried += 1;
                if let Some((lists, c)) = s {
                    if c > best.1 || tried == 1 {
                        best = (tried - 1, c);
                    }
                    if c >= need && found.is_none() {
                        found = Some((chunk[off].clone(), lists, c));
                    }
                }
            }
            if found.is_some() {
                break;
            }
        }
        let Some((subset, lists, covered)) = found else {
            return Err(Error::SearchExhausted {
                target: alpha,
                best: best.1 as f64 / residual.len() as f64,
                tried,
            });
        };
        rounds.push(CoverRound {
            subset: subset.clone(),
            residual_before: residual.len(),
            covered,
            tried,
            exhaustive,
        });
        slots.push(SlotRecord::new(subset, list_fingerprint(&lists)));
        residual.retain(|&i| !lists[cols[i]].contains(&dataset.label(i)));
        per_round.push(lists);
    }
    if !residual.is_empty() {
        return Err(Error::SearchExhausted {
            target: alpha,
            best: 1.0 - residual.len() as f64 / m as f64,
            tried: rounds.iter().map(|r| r.tried).sum(),
        });
    }
    Ok(CoverOutcome {
        lists: union_lists(&per_round, n),
        rounds,
        slots,
        q,
        p: learner.k() * q,
        alpha,
    })
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Rebuilds the cover lists from recorded subsets.
pub(crate) fn replay_cover(
    learner: &OneInclusionLearner,
    dataset: &Dataset,
    slots: &[SlotRecord],
) -> Result<Vec<Vec<Label>>> {
    let cols = learner.class().columns_for(dataset)?;
    let mut per_round = Vec::new();
    for (s, slot) in slots.iter().enumerate() {
        let lists = subset_lists(learner, dataset, &cols, &slot.indices)?;
        if list_fingerprint(&lists) != slot.fingerprint {
            return Err(Error::NonDeterministicLearner { phase: 0, slot: s });
        }
        per_round.push(lists);
    }
    Ok(union_lists(&per_round, learner.class().n_columns()))
}

/// Per-column lists as a lookup keyed by the class's instances.
pub(crate) fn lists_by_instance(
    learner: &OneInclusionLearner,
    lists: &[Vec<Label>],
) -> HashMap<crate::domain::Instance, Vec<Label>> {
    learner
        .class()
        .columns()
        .iter()
        .cloned()
        .zip(lists.iter().cloned())
        .collect()
}
