//! Synthetic learners used to exercise the boosters: oracles with a known
//! edge, a random guesser and a constant.

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Classifier, TrainRequest, WeakLearner};
use crate::domain::{fnv1a, Dataset, Instance, Label, ListFunction, RandomStream};
use crate::error::{Error, Result};

/// Lookup table with a default label for unseen instances.
#[derive(Clone, Debug, PartialEq)]
pub struct TableClassifier {
    table: HashMap<Instance, Label>,
    default: Label,
}

impl TableClassifier {
    pub fn new(table: HashMap<Instance, Label>, default: Label) -> Self {
        TableClassifier { table, default }
    }
}

impl Classifier for TableClassifier {
    fn predict(&self, x: &Instance) -> Label {
        self.table.get(x).copied().unwrap_or(self.default)
    }
}

/// A label that is not `y`: the first such entry of `mu(x)`, else the
/// lowest such label of the alphabet.
fn wrong_label(mu: &ListFunction, x: &Instance, y: Label, alphabet: usize) -> Label {
    mu.lookup(x)
        .iter()
        .copied()
        .find(|&l| l != y)
        .unwrap_or_else(|| Label::from_index(usize::from(y.index() == 0).min(alphabet - 1)))
}

/// Distinct training instances in first-occurrence order, each with the
/// label of its first example.
fn training_instances(dataset: &Dataset) -> Vec<(usize, &Instance, Label)> {
    let mut seen = HashMap::with_capacity(dataset.len());
    let mut out = Vec::new();
    for (i, e) in dataset.examples().iter().enumerate() {
        if seen.insert(&e.instance, ()).is_none() {
            out.push((i, &e.instance, e.label));
        }
    }
    out
}

/// Memorizes the labels of sampled instances and answers every other
/// training instance with a wrong label from the hint.
///
/// Its edge under the boosting distribution is the mass of the sampled
/// support, so it is only weak when `m0` is small relative to `m`.
#[derive(Clone, Debug, Default)]
pub struct MemorizingOracle;

impl WeakLearner for MemorizingOracle {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn train(&self, req: &TrainRequest<'_>) -> Result<Arc<dyn Classifier>> {
        let ds = req.dataset;
        let mut table: HashMap<Instance, Label> = training_instances(ds)
            .into_iter()
            .map(|(_, x, y)| (x.clone(), wrong_label(req.hint, x, y, ds.alphabet_size())))
            .collect();
        for &i in req.sample {
            table.insert(ds.instance(i).clone(), ds.label(i));
        }
        Ok(Arc::new(TableClassifier::new(table, Label(0))))
    }
}

/// Oracle with a calibrated edge against the current distribution.
///
/// Sorts covered instances by weight, heaviest first, and answers them
/// correctly until the weighted accuracy reaches `(1/k + edge) · coverage`;
/// every other instance gets a wrong label. This is the least accuracy the
/// BRG condition allows, spent where it helps Hedge least.
#[derive(Clone, Debug)]
pub struct CalibratedOracle {
    edge: f64,
}

impl CalibratedOracle {
    pub fn new(edge: f64) -> Result<Self> {
        if !(edge > 0.0 && edge < 1.0) {
            return Err(Error::InvalidGamma(edge));
        }
        Ok(CalibratedOracle { edge })
    }

    pub fn edge(&self) -> f64 {
        self.edge
    }
}

impl WeakLearner for CalibratedOracle {
    fn name(&self) -> String {
        format!("calibrated({})", self.edge)
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    fn train(&self, req: &TrainRequest<'_>) -> Result<Arc<dyn Classifier>> {
        let ds = req.dataset;
        let weights = req
            .weights
            .ok_or_else(|| Error::InvalidParams("calibrated oracle needs the boosting distribution".into()))?;
        let k = req.hint.declared_size().max(1);
        let instances = training_instances(ds);
        let slot: HashMap<&Instance, usize> = instances.iter().enumerate().map(|(s, (_, x, _))| (*x, s)).collect();
        let mut mass = vec![0.0; instances.len()];
        let mut coverage = 0.0;
        for (i, e) in ds.examples().iter().enumerate() {
            let s = slot[&e.instance];
            if e.label == instances[s].2 && req.hint.contains(&e.instance, e.label) {
                mass[s] += weights[i];
                coverage += weights[i];
            }
        }
        let target = (1.0 / k as f64 + self.edge) * coverage;
        let mut order: Vec<usize> = (0..instances.len()).filter(|&s| mass[s] > 0.0).collect();
        order.sort_by(|&a, &b| mass[b].total_cmp(&mass[a]).then(a.cmp(&b)));
        let mut correct = vec![false; instances.len()];
        let mut acc = 0.0;
        for s in order {
            if acc >= target + 1e-12 {
                break;
            }
            correct[s] = true;
            acc += mass[s];
        }
        let table = instances
            .iter()
            .enumerate()
            .map(|(s, (_, x, y))| {
                let l = if correct[s] {
                    *y
                } else {
                    wrong_label(req.hint, x, *y, ds.alphabet_size())
                };
                ((*x).clone(), l)
            })
            .collect();
        Ok(Arc::new(TableClassifier::new(table, Label(0))))
    }
}

/// Uniform guesses from the hint list, seeded by the sample so that the
/// same call always returns the same table.
#[derive(Clone, Debug, Default)]
pub struct RandomGuess {
    salt: u64,
}

impl RandomGuess {
    pub fn new(salt: u64) -> Self {
        RandomGuess { salt }
    }
}

impl WeakLearner for RandomGuess {
    fn name(&self) -> String {
        "random".into()
    }

    fn train(&self, req: &TrainRequest<'_>) -> Result<Arc<dyn Classifier>> {
        let bytes: Vec<u8> = req.sample.iter().flat_map(|i| (*i as u64).to_le_bytes()).collect();
        let mut rng = RandomStream::new(self.salt ^ fnv1a(&bytes)).child("guess");
        let alphabet = req.dataset.alphabet_size();
        let table = training_instances(req.dataset)
            .into_iter()
            .map(|(_, x, _)| {
                let list = req.hint.lookup(x);
                let l = list
                    .choose(&mut rng)
                    .copied()
                    .unwrap_or_else(|| Label::from_index(rng.gen_range(0..alphabet)));
                (x.clone(), l)
            })
            .collect();
        Ok(Arc::new(TableClassifier::new(table, Label(0))))
    }
}

/// Always predicts one label.
#[derive(Clone, Debug)]
pub struct ConstantLearner {
    label: Label,
}

impl ConstantLearner {
    pub fn new(label: Label) -> Self {
        ConstantLearner { label }
    }
}

impl Classifier for ConstantLearner {
    fn predict(&self, _x: &Instance) -> Label {
        self.label
    }
}

impl WeakLearner for ConstantLearner {
    fn name(&self) -> String {
        format!("constant({})", self.label)
    }

    fn train(&self, _req: &TrainRequest<'_>) -> Result<Arc<dyn Classifier>> {
        Ok(Arc::new(self.clone()))
    }
}
