use std::sync::Arc;

use super::{Classifier, TrainRequest, WeakLearner};
use crate::domain::{Instance, Label, LabeledExample};
use crate::error::{Error, Result};
use crate::oig::FiniteClass;

/// Exhaustive empirical risk minimization over a finite class.
#[derive(Clone, Debug)]
pub struct Erm {
    class: Arc<FiniteClass>,
}

/// A single class member used as a classifier. Instances outside the
/// class universe get label 0.
#[derive(Clone, Debug)]
pub struct MemberClassifier {
    class: Arc<FiniteClass>,
    row: usize,
}

impl MemberClassifier {
    pub fn row(&self) -> usize {
        self.row
    }
}

impl Classifier for MemberClassifier {
    fn predict(&self, x: &Instance) -> Label {
        match self.class.column_of(x) {
            Some(c) => self.class.value(self.row, c),
            None => Label(0),
        }
    }
}

impl Erm {
    pub fn new(class: Arc<FiniteClass>) -> Result<Self> {
        if class.is_empty() {
            return Err(Error::EmptyClass);
        }
        Ok(Erm { class })
    }

    pub fn class(&self) -> &Arc<FiniteClass> {
        &self.class
    }

    /// Row `row` of the class as a classifier.
    pub fn member(&self, row: usize) -> Option<MemberClassifier> {
        (row < self.class.len()).then(|| MemberClassifier {
            class: Arc::clone(&self.class),
            row,
        })
    }

    /// Member with the most sample hits; the lowest row index wins ties.
    pub fn select(&self, sample: &[LabeledExample]) -> Result<MemberClassifier> {
        let cols = sample
            .iter()
            .map(|e| {
                self.class
                    .column_of(&e.instance)
                    .ok_or_else(|| Error::UnknownInstance(e.instance.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut best = (0usize, 0usize);
        for r in 0..self.class.len() {
            let row = self.class.row(r);
            let hits = cols.iter().zip(sample).filter(|(&c, e)| row[c] == e.label).count();
            if hits > best.1 || r == 0 {
                best = (r, hits);
            }
            if hits == sample.len() {
                break;
            }
        }
        Ok(MemberClassifier {
            class: Arc::clone(&self.class),
            row: best.0,
        })
    }
}

impl WeakLearner for Erm {
    fn name(&self) -> String {
        "erm".into()
    }

    fn train(&self, req: &TrainRequest<'_>) -> Result<Arc<dyn Classifier>> {
        let sample = req.dataset.gather(req.sample);
        Ok(Arc::new(self.select(&sample)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(k: &str, l: u32) -> LabeledExample {
        LabeledExample::new(Instance::key(k), Label(l))
    }

    fn erm(rows: &[&[u32]]) -> Erm {
        Erm::new(Arc::new(FiniteClass::from_table(rows, 4).unwrap())).unwrap()
    }

    #[test]
    fn picks_perfect_constant() {
        let e = erm(&[&[0, 0], &[1, 1]]);
        let h = e.select(&[ex("c0", 1), ex("c1", 1)]).unwrap();
        assert_eq!(h.row(), 1);
        assert_eq!(h.predict(&Instance::key("c0")), Label(1));
    }

    #[test]
    fn realizable_sample_gets_consistent_member() {
        let e = erm(&[&[0, 0, 0], &[1, 0, 0], &[2, 2, 0], &[3, 1, 2], &[3, 1, 3]]);
        let sample = [ex("c0", 3), ex("c1", 1), ex("c2", 2)];
        let h = e.select(&sample).unwrap();
        assert!(h.row() <= 3);
        assert!(sample.iter().all(|s| h.predict(&s.instance) == s.label));
    }

    #[test]
    fn ties_go_to_lower_index() {
        let e = erm(&[&[0, 1], &[1, 0]]);
        assert_eq!(e.select(&[ex("c0", 0), ex("c1", 0)]).unwrap().row(), 0);
        assert_eq!(e.select(&[]).unwrap().row(), 0);
    }

    #[test]
    fn errors() {
        let empty = FiniteClass::new(vec![Instance::key("a")], vec![], 2).unwrap();
        assert!(matches!(Erm::new(Arc::new(empty)), Err(Error::EmptyClass)));
        let e = erm(&[&[0, 1]]);
        assert!(matches!(e.select(&[ex("nope", 0)]), Err(Error::UnknownInstance(_))));
    }
}
