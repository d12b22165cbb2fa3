//! The weak-learner contract, concrete learners and the BRG auditor.
//!
//! A learner is a pure map from (sample indices, hint list) to a classifier.
//! Whether the classifier is actually "better than random guess" is never
//! assumed: [`audit_brg`] checks it against the weighted training set.

mod audit;
mod erm;
mod oracle;
mod stump;
mod too_weak;

use std::fmt;
use std::sync::Arc;

pub use audit::{audit_brg, audit_edge, BrgAudit, BrgAuditLog};
pub use erm::{Erm, MemberClassifier};
pub use oracle::{CalibratedOracle, ConstantLearner, MemorizingOracle, RandomGuess, TableClassifier};
pub use stump::{Stump, StumpLearner};
pub use too_weak::TooWeak;

use crate::compression::SlotRecord;
use crate::domain::{fingerprint, Dataset, Instance, Label, ListFunction, ListId};
use crate::error::{Error, Result};

/// A total function from instances to labels.
pub trait Classifier: Send + Sync {
    fn predict(&self, x: &Instance) -> Label;

    fn predict_all(&self, dataset: &Dataset) -> Vec<Label> {
        dataset.examples().iter().map(|e| self.predict(&e.instance)).collect()
    }
}

/// One call to a weak learner.
///
/// `sample` indexes into `dataset` and may repeat. `weights` is the current
/// boosting distribution; deterministic learners must ignore it so that a
/// replay from the sample alone reproduces them.
pub struct TrainRequest<'a> {
    pub dataset: &'a Dataset,
    pub sample: &'a [usize],
    pub hint: &'a ListFunction,
    pub weights: Option<&'a [f64]>,
}

pub trait WeakLearner: Send + Sync {
    fn name(&self) -> String;

    fn train(&self, req: &TrainRequest<'_>) -> Result<Arc<dyn Classifier>>;

    /// True when the output depends on `(sample, hint)` only.
    fn is_deterministic(&self) -> bool {
        true
    }
}

/// A learner together with the number of examples it draws per call.
#[derive(Clone)]
pub struct WeakLearnerSpec {
    learner: Arc<dyn WeakLearner>,
    m0: usize,
}

impl fmt::Debug for WeakLearnerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeakLearnerSpec")
            .field("learner", &self.learner.name())
            .field("m0", &self.m0)
            .finish()
    }
}

impl WeakLearnerSpec {
    pub fn new(learner: Arc<dyn WeakLearner>, m0: usize) -> Result<Self> {
        if m0 == 0 {
            return Err(Error::InvalidParams("m0 must be at least 1".into()));
        }
        Ok(WeakLearnerSpec { learner, m0 })
    }

    pub fn id(&self) -> String {
        self.learner.name()
    }

    pub fn m0(&self) -> usize {
        self.m0
    }

    pub fn deterministic(&self) -> bool {
        self.learner.is_deterministic()
    }

    pub fn learner(&self) -> &Arc<dyn WeakLearner> {
        &self.learner
    }

    /// Trains on `sample` and evaluates the result on the whole dataset.
    pub fn fit(
        &self,
        dataset: &Dataset,
        sample: Vec<usize>,
        hint: &ListFunction,
        weights: Option<&[f64]>,
    ) -> Result<WeakHypothesis> {
        let classifier = self.learner.train(&TrainRequest {
            dataset,
            sample: &sample,
            hint,
            weights,
        })?;
        Ok(WeakHypothesis::new(classifier, dataset, sample, hint.id().clone()))
    }
}

/// A trained classifier, the sample that produced it and its predictions on
/// the training set.
#[derive(Clone)]
pub struct WeakHypothesis {
    classifier: Arc<dyn Classifier>,
    record: SlotRecord,
    trained_with: ListId,
    on_train: Arc<Vec<Label>>,
}

impl fmt::Debug for WeakHypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeakHypothesis")
            .field("record", &self.record)
            .field("trained_with", &self.trained_with)
            .finish()
    }
}

impl WeakHypothesis {
    pub fn new(classifier: Arc<dyn Classifier>, dataset: &Dataset, sample: Vec<usize>, trained_with: ListId) -> Self {
        let on_train = classifier.predict_all(dataset);
        let record = SlotRecord::new(sample, fingerprint(&on_train));
        WeakHypothesis {
            classifier,
            record,
            trained_with,
            on_train: Arc::new(on_train),
        }
    }

    pub fn predict(&self, x: &Instance) -> Label {
        self.classifier.predict(x)
    }

    /// Prediction on training example `i`, from the cached table.
    pub fn predict_train(&self, i: usize) -> Label {
        self.on_train[i]
    }

    pub fn train_predictions(&self) -> &[Label] {
        &self.on_train
    }

    pub fn record(&self) -> &SlotRecord {
        &self.record
    }

    pub fn trained_with(&self) -> &ListId {
        &self.trained_with
    }

    pub fn classifier(&self) -> &Arc<dyn Classifier> {
        &self.classifier
    }

    /// Unweighted training accuracy.
    pub fn train_accuracy(&self, dataset: &Dataset) -> f64 {
        let hits = (0..dataset.len())
            .filter(|&i| self.on_train[i] == dataset.label(i))
            .count();
        hits as f64 / dataset.len() as f64
    }
}

/// Plurality of `labels`, lowest label on ties.
pub(crate) fn plurality(labels: impl IntoIterator<Item = Label>) -> Option<Label> {
    let mut counts: Vec<(Label, usize)> = Vec::new();
    for l in labels {
        match counts.iter_mut().find(|(m, _)| *m == l) {
            Some((_, c)) => *c += 1,
            None => counts.push((l, 1)),
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(l, _)| l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plurality_prefers_lowest_on_ties() {
        assert_eq!(plurality([Label(2), Label(1), Label(2), Label(1)]), Some(Label(1)));
        assert_eq!(plurality([Label(3), Label(3), Label(0)]), Some(Label(3)));
        assert_eq!(plurality(Vec::<Label>::new()), None);
    }
}
