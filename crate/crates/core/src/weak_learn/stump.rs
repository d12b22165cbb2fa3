use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Classifier, TrainRequest, WeakLearner};
use crate::domain::{Instance, Label, LabeledExample, ListFunction};
use crate::error::{Error, Result};

/// Single-split rule `x[feature] <= threshold ? left : right`; with no
/// feature it is the constant `left`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: Option<usize>,
    pub threshold: f64,
    pub left: Label,
    pub right: Label,
}

impl Classifier for Stump {
    /// Key instances and vectors too short for the feature go left.
    fn predict(&self, x: &Instance) -> Label {
        match (self.feature, x.features()) {
            (Some(f), Some(v)) if f < v.len() && v[f] > self.threshold => self.right,
            _ => self.left,
        }
    }
}

/// Exhaustive decision-stump search. Candidate labels are the union of the
/// hint lists at the sample points.
#[derive(Clone, Debug, Default)]
pub struct StumpLearner;

fn argmax_label(counts: &[usize], labels: &[Label]) -> (Label, usize) {
    let mut best = (labels[0], counts[0]);
    for (i, &l) in labels.iter().enumerate().skip(1) {
        if counts[i] > best.1 {
            best = (l, counts[i]);
        }
    }
    best
}

impl StumpLearner {
    /// Highest sample accuracy; ties resolve to the constant rule, then by
    /// feature, threshold and labels in increasing order.
    pub fn fit(&self, sample: &[LabeledExample], mu: &ListFunction) -> Result<(Stump, usize)> {
        let mut points = Vec::with_capacity(sample.len());
        for e in sample {
            let v = e
                .instance
                .features()
                .ok_or_else(|| Error::NonNumericInstance(e.instance.to_string()))?;
            points.push((v, e.label));
        }
        let mut labels: Vec<Label> = sample
            .iter()
            .flat_map(|e| mu.lookup(&e.instance).into_owned())
            .collect();
        if labels.is_empty() {
            labels = sample.iter().map(|e| e.label).collect();
        }
        if labels.is_empty() {
            labels.push(Label(0));
        }
        labels.sort();
        labels.dedup();
        let slot = |l: Label| labels.binary_search(&l).ok();

        let mut totals = vec![0usize; labels.len()];
        for (_, y) in &points {
            if let Some(s) = slot(*y) {
                totals[s] += 1;
            }
        }
        let (c, hits) = argmax_label(&totals, &labels);
        let mut best = (
            Stump {
                feature: None,
                threshold: 0.0,
                left: c,
                right: c,
            },
            hits,
        );

        let dims = points.iter().map(|(v, _)| v.len()).min().unwrap_or(0);
        for f in 0..dims {
            let mut order: Vec<usize> = (0..points.len()).collect();
            order.sort_by(|&a, &b| points[a].0[f].total_cmp(&points[b].0[f]));
            let mut left = vec![0usize; labels.len()];
            let mut right = totals.clone();
            for w in 0..order.len().saturating_sub(1) {
                let (v, y) = points[order[w]];
                if let Some(s) = slot(y) {
                    left[s] += 1;
                    right[s] -= 1;
                }
                let lo = v[f];
                let hi = points[order[w + 1]].0[f];
                if lo == hi {
                    continue;
                }
                let (l, lh) = argmax_label(&left, &labels);
                let (r, rh) = argmax_label(&right, &labels);
                if lh + rh > best.1 {
                    best = (
                        Stump {
                            feature: Some(f),
                            threshold: lo + (hi - lo) / 2.0,
                            left: l,
                            right: r,
                        },
                        lh + rh,
                    );
                }
            }
        }
        Ok(best)
    }
}

impl WeakLearner for StumpLearner {
    fn name(&self) -> String {
        "stump".into()
    }

    fn train(&self, req: &TrainRequest<'_>) -> Result<Arc<dyn Classifier>> {
        let sample = req.dataset.gather(req.sample);
        Ok(Arc::new(self.fit(&sample, req.hint)?.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v: &[f64], l: u32) -> LabeledExample {
        LabeledExample::new(Instance::Point(v.to_vec()), Label(l))
    }

    /// Accuracy of the best stump over every feature, every cut between
    /// observed values and every label pair, by direct enumeration.
    fn brute_force_best(sample: &[LabeledExample], labels: u32) -> usize {
        let mut best = 0;
        let dims = sample[0].instance.features().unwrap().len();
        for f in 0..dims {
            let mut cuts: Vec<f64> = sample.iter().map(|e| e.instance.features().unwrap()[f]).collect();
            cuts.push(f64::NEG_INFINITY);
            for &t in &cuts {
                for l in 0..labels {
                    for r in 0..labels {
                        let hits = sample
                            .iter()
                            .filter(|e| {
                                let v = e.instance.features().unwrap()[f];
                                let p = if v <= t { l } else { r };
                                Label(p) == e.label
                            })
                            .count();
                        best = best.max(hits);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn separable_line() {
        let s = [pt(&[0.0], 0), pt(&[1.0], 1)];
        let (st, hits) = StumpLearner.fit(&s, &ListFunction::universal(2)).unwrap();
        assert_eq!(hits, 2);
        assert_eq!(st.threshold, 0.5);
        assert_eq!(st.predict(&Instance::Point(vec![0.2])), Label(0));
        assert_eq!(st.predict(&Instance::Point(vec![0.7])), Label(1));
    }

    #[test]
    fn uniform_labels_give_constant() {
        let s = [pt(&[0.0], 2), pt(&[3.0], 2), pt(&[1.0], 2)];
        let (st, hits) = StumpLearner.fit(&s, &ListFunction::universal(3)).unwrap();
        assert_eq!(st.feature, None);
        assert_eq!(hits, 3);
        assert_eq!(st.predict(&Instance::key("k")), Label(2));
    }

    #[test]
    fn xor_quadrants_cap_at_three_quarters() {
        let s = [
            pt(&[-2.0, -2.0], 0),
            pt(&[-1.0, -1.0], 0),
            pt(&[1.0, 1.0], 0),
            pt(&[2.0, 2.0], 0),
            pt(&[-2.0, 1.0], 1),
            pt(&[-1.0, 2.0], 1),
            pt(&[3.0, -2.0], 1),
            pt(&[4.0, -1.0], 1),
        ];
        let (st, hits) = StumpLearner.fit(&s, &ListFunction::universal(2)).unwrap();
        assert_eq!(hits, brute_force_best(&s, 2));
        assert_eq!(hits, 6);
        assert_eq!(st.feature, Some(0));
        assert_eq!(st.threshold, 2.5);
    }

    #[test]
    fn labels_restricted_to_hint_union() {
        use crate::domain::ListId;
        use std::collections::HashMap;
        let s = [pt(&[0.0], 0), pt(&[1.0], 1), pt(&[2.0], 1)];
        let table: HashMap<Instance, Vec<Label>> = s
            .iter()
            .map(|e| (e.instance.clone(), vec![Label(2), Label(0)]))
            .collect();
        let mu = ListFunction::explicit(ListId::new("h"), 2, table).unwrap();
        let (st, hits) = StumpLearner.fit(&s, &mu).unwrap();
        assert_eq!(hits, 1);
        assert!(st.left != Label(1) && st.right != Label(1));
    }

    #[test]
    fn rejects_key_instances() {
        let s = [LabeledExample::new(Instance::key("a"), Label(0))];
        assert!(matches!(
            StumpLearner.fit(&s, &ListFunction::universal(2)),
            Err(Error::NonNumericInstance(_))
        ));
    }
}
