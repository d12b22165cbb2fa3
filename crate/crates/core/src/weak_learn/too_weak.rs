use std::sync::Arc;

use super::{Classifier, TrainRequest, WeakLearner};
use crate::domain::{Alphabet, Instance, Label, LabeledExample};
use crate::error::{Error, Result};

/// Learner over the universe `{a, b, c}` that can only output
/// `h1 = (a→1, b→1, c→3)` or `h2 = (a→2, b→2, c→3)`: it never separates
/// `a` from `b`.
#[derive(Clone, Debug, Default)]
pub struct TooWeak;

/// One of the two hypotheses, stored as dense labels for `{a,b}` and `c`.
/// Other instances are treated like `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct TooWeakHypothesis {
    pub which: u8,
    ab: Label,
    c: Label,
}

impl Classifier for TooWeakHypothesis {
    fn predict(&self, x: &Instance) -> Label {
        match x {
            Instance::Key(k) if k == "a" || k == "b" => self.ab,
            _ => self.c,
        }
    }
}

fn dense(alphabet: &Alphabet, v: i64) -> Result<Label> {
    alphabet
        .dense_of(v)
        .ok_or_else(|| Error::InvalidParams(format!("label {v} missing from the alphabet")))
}

impl TooWeak {
    /// Picks the hypothesis with more sample hits, `h1` on ties. Labels are
    /// the external values 1, 2, 3 of `alphabet`.
    pub fn fit(&self, sample: &[LabeledExample], alphabet: &Alphabet) -> Result<TooWeakHypothesis> {
        let (one, two, three) = (dense(alphabet, 1)?, dense(alphabet, 2)?, dense(alphabet, 3)?);
        let h1 = TooWeakHypothesis {
            which: 1,
            ab: one,
            c: three,
        };
        let h2 = TooWeakHypothesis {
            which: 2,
            ab: two,
            c: three,
        };
        let (mut s1, mut s2) = (0usize, 0usize);
        for e in sample {
            match &e.instance {
                Instance::Key(k) if k == "a" || k == "b" || k == "c" => {}
                other => return Err(Error::UnknownInstance(other.to_string())),
            }
            s1 += usize::from(h1.predict(&e.instance) == e.label);
            s2 += usize::from(h2.predict(&e.instance) == e.label);
        }
        Ok(if s2 > s1 { h2 } else { h1 })
    }
}

impl WeakLearner for TooWeak {
    fn name(&self) -> String {
        "too-weak".into()
    }

    fn train(&self, req: &TrainRequest<'_>) -> Result<Arc<dyn Classifier>> {
        let sample = req.dataset.gather(req.sample);
        Ok(Arc::new(self.fit(&sample, req.dataset.alphabet())?))
    }
}
