use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::cover::{initial_cover, lists_by_instance, replay_cover, DEFAULT_SEARCH_BUDGET};
use super::dimension::{kds_dimension, DEFAULT_DIMENSION_BUDGET};
use super::predict::OneInclusionLearner;
use super::wrong_label::{replay_wrong_label, wrong_label_learner, GameParams};
use super::{FiniteClass, OrientationStrategy};
use crate::compression::{CompressionRecord, PhaseRecord, PhaseTag};
use crate::domain::{Dataset, Label, ListFunction, ListId, RandomStream};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ListPacParams {
    pub k: usize,
    /// `k`-DS dimension; computed from the class when absent.
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub strategy: OrientationStrategy,
    pub cover_budget: u64,
    pub dimension_budget: u64,
    #[serde(default)]
    pub game: GameParams,
    pub seed: u64,
}

impl ListPacParams {
    pub fn new(k: usize) -> Self {
        ListPacParams {
            k,
            d: None,
            strategy: OrientationStrategy::Flow,
            cover_budget: DEFAULT_SEARCH_BUDGET,
            dimension_budget: DEFAULT_DIMENSION_BUDGET,
            game: GameParams::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionRound {
    pub j: usize,
    /// Labels in the relabeled alphabet, `p − j + 1`.
    pub alphabet: usize,
    /// All lists already had at most `p − j` labels.
    pub skipped: bool,
    pub class_size: usize,
    pub max_list: usize,
}

#[derive(Clone, Debug)]
pub struct ListPacOutcome {
    pub list: ListFunction,
    pub record: CompressionRecord,
    pub d: usize,
    pub q: usize,
    pub p: usize,
    pub rounds: Vec<ReductionRound>,
}

/// The class relabeled by list positions: training instances must carry a
/// listed label (other rows are dropped); off the sample an unlisted label
/// becomes the sentinel `alphabet`.
fn relabel(class: &FiniteClass, lists: &[Vec<Label>], train_cols: &[bool], alphabet: usize) -> Result<FiniteClass> {
    let rows: Vec<Vec<Label>> = class
        .rows()
        .iter()
        .filter_map(|row| {
            row.iter()
                .enumerate()
                .map(|(c, y)| match lists[c].iter().position(|l| l == y) {
                    Some(pos) => Some(Label::from_index(pos)),
                    None if train_cols[c] => None,
                    None => Some(Label::from_index(alphabet)),
                })
                .collect::<Option<Vec<Label>>>()
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::NotRealizable);
    }
    FiniteClass::dedup(class.columns().to_vec(), rows, alphabet + 1)
}

fn relabel_dataset(
    dataset: &Dataset,
    lists: &[Vec<Label>],
    cols: &[usize],
    alphabet: usize,
    j: usize,
) -> Result<Dataset> {
    let labels = (0..dataset.len())
        .map(|i| {
            lists[cols[i]]
                .iter()
                .position(|&l| l == dataset.label(i))
                .map(Label::from_index)
                .ok_or(Error::PhaseFailure { phase: j, example: i })
        })
        .collect::<Result<Vec<_>>>()?;
    dataset.relabeled(&labels, alphabet)
}

fn map_back(prev: &[Vec<Label>], positions: &[Vec<Label>]) -> Vec<Vec<Label>> {
    prev.iter()
        .zip(positions)
        .map(|(list, keep)| {
            let mut pos: Vec<usize> = keep.iter().map(|l| l.index()).filter(|&i| i < list.len()).collect();
            pos.sort_unstable();
            pos.into_iter().map(|i| list[i]).collect()
        })
        .collect()
}

fn train_columns(class: &FiniteClass, cols: &[usize]) -> Vec<bool> {
    let mut t = vec![false; class.n_columns()];
    for &c in cols {
        t[c] = true;
    }
    t
}

fn finish(lists: &[Vec<Label>], k: usize, learner: &OneInclusionLearner) -> Result<ListFunction> {
    let table: HashMap<_, _> = lists_by_instance(learner, lists);
    ListFunction::explicit(ListId::new("list-pac"), k, table)
}

/// `k`-list PAC learning on a finite class: a cover of `k·q` labels per
/// instance, then rounds `j = 1, …, p−k` that relabel the class by list
/// position and drop one label per instance with the wrong-label game.
/// Rounds in which every list already has at most `p − j` labels are
/// skipped.
pub fn k_list_pac_learn(class: Arc<FiniteClass>, dataset: &Dataset, params: &ListPacParams) -> Result<ListPacOutcome> {
    let k = params.k;
    let d = match params.d {
        Some(d) => d,
        None => kds_dimension(&class, k, params.dimension_budget)?.d,
    };
    let cols = class.columns_for(dataset)?;
    let train = train_columns(&class, &cols);
    let rng = RandomStream::new(params.seed);
    let base = OneInclusionLearner::new(Arc::clone(&class), k, params.strategy)?;
    let cover = initial_cover(&base, dataset, d, params.cover_budget, &rng.child("cover"))?;
    let p = cover.p;
    let mut record = CompressionRecord::new(dataset.len());
    let mut last = record.push(PhaseRecord {
        tag: PhaseTag::Cover,
        list_ref: None,
        list_size: p,
        slots: cover.slots.clone(),
    });
    let mut lists = cover.lists.clone();
    let mut rounds = Vec::new();
    for j in 1..=p.saturating_sub(k) {
        let alphabet = p - j + 1;
        if lists.iter().all(|l| l.len() < alphabet) {
            rounds.push(ReductionRound {
                j,
                alphabet,
                skipped: true,
                class_size: 0,
                max_list: lists.iter().map(Vec::len).max().unwrap_or(0),
            });
            continue;
        }
        let hj = Arc::new(relabel(&class, &lists, &train, alphabet)?);
        let dj = relabel_dataset(dataset, &lists, &cols, alphabet, j)?;
        let learner = OneInclusionLearner::new(Arc::clone(&hj), alphabet - 1, params.strategy)?;
        let out = wrong_label_learner(
            &learner,
            &dj,
            alphabet,
            d,
            &params.game,
            &rng.child(format!("round-{j}")),
        )?;
        lists = map_back(&lists, &out.lists);
        rounds.push(ReductionRound {
            j,
            alphabet,
            skipped: false,
            class_size: hj.len(),
            max_list: lists.iter().map(Vec::len).max().unwrap_or(0),
        });
        last = record.push(PhaseRecord {
            tag: PhaseTag::WrongLabel { j },
            list_ref: Some(last),
            list_size: alphabet,
            slots: out.slots,
        });
    }
    if let Some(i) = (0..dataset.len()).find(|&i| !lists[cols[i]].contains(&dataset.label(i))) {
        return Err(Error::PhaseFailure { phase: p, example: i });
    }
    Ok(ListPacOutcome {
        list: finish(&lists, k, &base)?,
        record,
        d,
        q: cover.q,
        p,
        rounds,
    })
}

/// Rebuilds the `k`-list of a recorded run.
pub fn replay_list_pac(
    record: &CompressionRecord,
    class: Arc<FiniteClass>,
    dataset: &Dataset,
    k: usize,
    strategy: OrientationStrategy,
) -> Result<ListFunction> {
    record.validate()?;
    let (first, rest) = record
        .phases
        .split_first()
        .ok_or_else(|| Error::MalformedRecord("record has no phases".into()))?;
    if first.tag != PhaseTag::Cover {
        return Err(Error::MalformedRecord("first phase is not a cover".into()));
    }
    let cols = class.columns_for(dataset)?;
    let train = train_columns(&class, &cols);
    let base = OneInclusionLearner::new(Arc::clone(&class), k, strategy)?;
    let mut lists = replay_cover(&base, dataset, &first.slots)?;
    for (offset, phase) in rest.iter().enumerate() {
        let PhaseTag::WrongLabel { j } = phase.tag else {
            return Err(Error::MalformedRecord(format!("unexpected {:?} phase", phase.tag)));
        };
        let alphabet = phase.list_size;
        if alphabet < 2 {
            return Err(Error::MalformedRecord(format!(
                "phase {} has alphabet {alphabet}",
                offset + 1
            )));
        }
        let hj = Arc::new(relabel(&class, &lists, &train, alphabet)?);
        let dj = relabel_dataset(dataset, &lists, &cols, alphabet, j)?;
        let learner = OneInclusionLearner::new(hj, alphabet - 1, strategy)?;
        let positions = replay_wrong_label(&learner, &dj, alphabet, &phase.slots, offset + 1)?;
        lists = map_back(&lists, &positions);
    }
    finish(&lists, k, &base)
}
