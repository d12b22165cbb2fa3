//! The initial hint: cover the sample by retraining on whatever is still
//! misclassified, and list every hypothesis' vote.

use std::collections::HashMap;
use std::sync::Arc;

use crate::domain::{
    dedup_ordered, sample_iid, Dataset, ExampleDistribution, Instance, Label, ListFunction, ListId, ListRule,
    RandomStream,
};
use crate::error::{Error, Result};
use crate::hedge::EdgeAudit;
use crate::scalar::Scalar;
use crate::weak_learn::{audit_edge, BrgAuditLog, Classifier, WeakHypothesis, WeakLearnerSpec};

/// `μ(x) = (h_1(x), …, h_p(x))` without repeats.
pub(crate) struct VoteListRule {
    hypotheses: Vec<Arc<dyn Classifier>>,
}

impl ListRule for VoteListRule {
    fn list(&self, x: &Instance) -> Vec<Label> {
        dedup_ordered(self.hypotheses.iter().map(|h| h.predict(x)))
    }
}

/// The list function of a hint built from `hypotheses` (in order).
pub(crate) fn hint_list(dataset: &Dataset, hypotheses: &[WeakHypothesis]) -> Result<ListFunction> {
    let mut cached: HashMap<Instance, Vec<Label>> = HashMap::with_capacity(dataset.len());
    for (i, e) in dataset.examples().iter().enumerate() {
        cached
            .entry(e.instance.clone())
            .or_insert_with(|| dedup_ordered(hypotheses.iter().map(|h| h.predict_train(i))));
    }
    let rule = VoteListRule {
        hypotheses: hypotheses.iter().map(|h| Arc::clone(h.classifier())).collect(),
    };
    ListFunction::composed(ListId::new("hint"), hypotheses.len().max(1), cached, Arc::new(rule))
}

/// Output of [`build_initial_hint`].
#[derive(Clone, Debug)]
pub struct InitialHint<F = f64> {
    pub list: ListFunction,
    pub hypotheses: Vec<WeakHypothesis>,
    /// `|S_j|` before each executed round, then the final residual size.
    pub residual_sizes: Vec<usize>,
    /// Training indices still misclassified by every hypothesis.
    pub residual: Vec<usize>,
    pub audits: BrgAuditLog<F>,
}

impl<F: Scalar> InitialHint<F> {
    /// True when every training label lies in its list.
    pub fn covered(&self) -> bool {
        self.residual.is_empty()
    }

    /// Number of hypotheses actually trained, `p′ ≤ p`.
    pub fn rounds(&self) -> usize {
        self.hypotheses.len()
    }
}

/// Runs up to `p` rounds; round `j` trains on `m0` uniform draws from the
/// residual `S_j` with the universal list, and `S_{j+1}` keeps the points of
/// `S_j` that `h_j` gets wrong. Stops early once the residual is empty.
///
/// With `audit = Some(γ)` every round is checked for accuracy at least `γ`
/// on its residual.
pub fn build_initial_hint<F: Scalar>(
    dataset: &Dataset,
    learner: &WeakLearnerSpec,
    p: usize,
    rng: &RandomStream,
    audit: Option<F>,
) -> Result<InitialHint<F>> {
    if p == 0 {
        return Err(Error::InvalidParams("hint needs at least one round".into()));
    }
    let m = dataset.len();
    let universal = ListFunction::universal(dataset.alphabet_size());
    let mut residual: Vec<usize> = (0..m).collect();
    let mut residual_sizes = Vec::new();
    let mut hypotheses = Vec::new();
    let mut audits = BrgAuditLog::new();
    for j in 0..p {
        if residual.is_empty() {
            break;
        }
        residual_sizes.push(residual.len());
        let dist = ExampleDistribution::<F>::uniform_on(m, &residual)?;
        let sample = sample_iid(&dist, learner.m0(), &mut rng.child(format!("hint-{j}")))?;
        let weights: Vec<f64> = dist.weights().iter().map(|w| w.as_f64()).collect();
        let h = learner.fit(dataset, sample, &universal, Some(&weights))?;
        if let Some(gamma) = audit {
            let a = EdgeAudit::plain(gamma);
            audits.push(audit_edge(
                h.train_predictions(),
                dataset,
                &dist,
                &universal,
                a.base,
                a.gamma,
            )?);
        }
        residual.retain(|&i| h.predict_train(i) != dataset.label(i));
        hypotheses.push(h);
    }
    residual_sizes.push(residual.len());
    Ok(InitialHint {
        list: hint_list(dataset, &hypotheses)?,
        hypotheses,
        residual_sizes,
        residual,
        audits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::LabeledExample;
    use crate::weak_learn::{ConstantLearner, MemorizingOracle, TableClassifier, TrainRequest, WeakLearner};

    struct Truth;

    impl WeakLearner for Truth {
        fn name(&self) -> String {
            "truth".into()
        }

        fn train(&self, req: &TrainRequest<'_>) -> Result<Arc<dyn Classifier>> {
            let t = req
                .dataset
                .examples()
                .iter()
                .map(|e| (e.instance.clone(), e.label))
                .collect();
            Ok(Arc::new(TableClassifier::new(t, Label(0))))
        }
    }

    fn dataset(m: usize, alphabet: usize) -> Dataset {
        Dataset::new(
            (0..m)
                .map(|i| LabeledExample::new(Instance::key(format!("x{i}")), Label::from_index((i * 7) % alphabet)))
                .collect(),
            alphabet,
        )
        .unwrap()
    }

    #[test]
    fn perfect_learner_covers_in_one_round() {
        let ds = dataset(12, 4);
        let spec = WeakLearnerSpec::new(Arc::new(Truth), 3).unwrap();
        let hint = build_initial_hint::<f64>(&ds, &spec, 5, &RandomStream::new(1), Some(0.5)).unwrap();
        assert_eq!(hint.rounds(), 1);
        assert!(hint.covered());
        for e in ds.examples() {
            assert_eq!(&*hint.list.lookup(&e.instance), &[e.label]);
        }
        assert!(hint.audits.all_passed());
    }

    #[test]
    fn constant_learner_never_covers() {
        let ds = dataset(6, 3);
        let spec = WeakLearnerSpec::new(Arc::new(ConstantLearner::new(Label(0))), 2).unwrap();
        let hint = build_initial_hint::<f64>(&ds, &spec, 4, &RandomStream::new(1), Some(0.1)).unwrap();
        assert!(!hint.covered());
        assert_eq!(hint.rounds(), 4);
        assert!(!hint.audits.all_passed());
    }

    #[test]
    fn residuals_are_nested_and_lists_short() {
        let ds = dataset(50, 6);
        let spec = WeakLearnerSpec::new(Arc::new(MemorizingOracle), 10).unwrap();
        let hint = build_initial_hint::<f64>(&ds, &spec, 9, &RandomStream::new(3), None).unwrap();
        assert!(hint.residual_sizes.windows(2).all(|w| w[1] <= w[0]));
        for e in ds.examples() {
            assert!(hint.list.lookup(&e.instance).len() <= hint.rounds());
        }
        hint.list.validate().unwrap();
    }
}
