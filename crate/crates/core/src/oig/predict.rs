use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::graph::{build_oig, OneInclusionGraph};
use super::orientation::{find_orientation, Orientation, OrientationStrategy};
use super::FiniteClass;
use crate::domain::{Instance, Label, LabeledExample};
use crate::error::{Error, Result};

/// A class restricted to a column set, its graph and a chosen orientation.
#[derive(Debug)]
pub struct OrientedProjection {
    pub columns: Vec<usize>,
    pub class: FiniteClass,
    pub graph: OneInclusionGraph,
    pub orientation: Orientation,
    pub max_out_degree: usize,
}

/// The one-inclusion list predictor for a fixed class and list size.
/// Oriented projections are cached by column set, so every query on the
/// same `n + 1` instances shares one orientation.
#[derive(Debug)]
pub struct OneInclusionLearner {
    class: Arc<FiniteClass>,
    k: usize,
    strategy: OrientationStrategy,
    cache: Mutex<HashMap<Vec<usize>, Arc<OrientedProjection>>>,
}

/// Exact leave-one-out count for one hypothesis on one column set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaveOneOut {
    pub errors: usize,
    pub points: usize,
    pub max_out_degree: usize,
}

impl OneInclusionLearner {
    pub fn new(class: Arc<FiniteClass>, k: usize, strategy: OrientationStrategy) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        if class.is_empty() {
            return Err(Error::EmptyClass);
        }
        Ok(OneInclusionLearner {
            class,
            k,
            strategy,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn class(&self) -> &Arc<FiniteClass> {
        &self.class
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn strategy(&self) -> OrientationStrategy {
        self.strategy
    }

    /// The oriented restriction to `columns` (sorted, distinct).
    pub fn projection(&self, columns: &[usize]) -> Result<Arc<OrientedProjection>> {
        if let Some(p) = self.cache.lock().expect("cache lock").get(columns) {
            return Ok(Arc::clone(p));
        }
        let class = self.class.project(columns);
        let graph = build_oig(&class);
        let (orientation, max_out_degree) = find_orientation(&graph, self.k, self.strategy)?;
        let p = Arc::new(OrientedProjection {
            columns: columns.to_vec(),
            class,
            graph,
            orientation,
            max_out_degree,
        });
        self.cache
            .lock()
            .expect("cache lock")
            .entry(columns.to_vec())
            .or_insert_with(|| Arc::clone(&p));
        Ok(p)
    }

    /// List for column `x` given labeled columns `sample`. If `x` is itself
    /// labeled, that label is returned.
    pub fn predict_columns(&self, sample: &[(usize, Label)], x: usize) -> Result<Vec<Label>> {
        let mut known: Vec<(usize, Label)> = sample.to_vec();
        known.sort_unstable();
        known.dedup();
        if known.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::NotRealizable);
        }
        if let Some(&(_, y)) = known.iter().find(|(c, _)| *c == x) {
            return Ok(vec![y]);
        }
        let mut cols: Vec<usize> = known.iter().map(|(c, _)| *c).collect();
        let pos = cols.partition_point(|&c| c < x);
        cols.insert(pos, x);
        let proj = self.projection(&cols)?;
        let mut pattern = Vec::with_capacity(cols.len());
        pattern.extend(known[..pos].iter().map(|(_, y)| *y));
        pattern.push(Label(0));
        pattern.extend(known[pos..].iter().map(|(_, y)| *y));
        let e = proj.graph.edge_of(pos, &pattern).ok_or(Error::NotRealizable)?;
        Ok(proj
            .orientation
            .sigma(e)
            .iter()
            .map(|&v| proj.class.value(v, pos))
            .collect())
    }

    pub fn predict(&self, sample: &[LabeledExample], x: &Instance) -> Result<Vec<Label>> {
        let labeled = sample
            .iter()
            .map(|e| {
                self.class
                    .column_of(&e.instance)
                    .map(|c| (c, e.label))
                    .ok_or_else(|| Error::UnknownInstance(e.instance.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let c = self
            .class
            .column_of(x)
            .ok_or_else(|| Error::UnknownInstance(x.to_string()))?;
        self.predict_columns(&labeled, c)
    }

    /// Hides each of `columns` in turn, labels the rest by `row` and counts
    /// the queries whose list misses `row`'s label.
    pub fn leave_one_out(&self, columns: &[usize], row: usize) -> Result<LeaveOneOut> {
        let mut cols = columns.to_vec();
        cols.sort_unstable();
        cols.dedup();
        let labels: Vec<(usize, Label)> = cols.iter().map(|&c| (c, self.class.value(row, c))).collect();
        let mut errors = 0;
        for (i, &(c, y)) in labels.iter().enumerate() {
            let mut rest = labels.clone();
            rest.remove(i);
            if !self.predict_columns(&rest, c)?.contains(&y) {
                errors += 1;
            }
        }
        Ok(LeaveOneOut {
            errors,
            points: cols.len(),
            max_out_degree: self.projection(&cols)?.max_out_degree,
        })
    }
}

/// One-shot form of [`OneInclusionLearner::predict`] with the exact
/// max-flow orientation.
pub fn one_inclusion_list_predict(
    class: &FiniteClass,
    sample: &[LabeledExample],
    x: &Instance,
    k: usize,
) -> Result<Vec<Label>> {
    OneInclusionLearner::new(Arc::new(class.clone()), k, OrientationStrategy::Flow)?.predict(sample, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_completion_gives_its_label() {
        let c = FiniteClass::from_table(&[&[0, 1, 2], &[1, 1, 0]], 3).unwrap();
        let s = [LabeledExample::new(Instance::key("c0"), Label(1))];
        assert_eq!(
            one_inclusion_list_predict(&c, &s, &Instance::key("c2"), 1).unwrap(),
            vec![Label(0)]
        );
        let bad = [LabeledExample::new(Instance::key("c0"), Label(2))];
        assert_eq!(
            one_inclusion_list_predict(&c, &bad, &Instance::key("c2"), 1),
            Err(Error::NotRealizable)
        );
    }

    #[test]
    fn lone_edge_with_empty_sample() {
        let c = FiniteClass::full(2, 1);
        let l = one_inclusion_list_predict(&c, &[], &Instance::key("c0"), 1).unwrap();
        assert_eq!(l.len(), 1);
        let l = one_inclusion_list_predict(&c, &[], &Instance::key("c0"), 2).unwrap();
        assert_eq!(l, vec![Label(0), Label(1)]);
    }

    #[test]
    fn leave_one_out_equals_out_degree() {
        let c = Arc::new(FiniteClass::full(2, 3));
        let l = OneInclusionLearner::new(Arc::clone(&c), 1, OrientationStrategy::Flow).unwrap();
        let p = l.projection(&[0, 1, 2]).unwrap();
        for row in 0..c.len() {
            let r = l.leave_one_out(&[0, 1, 2], row).unwrap();
            assert_eq!(r.errors, p.orientation.out_degree(&p.graph, row));
            assert!(r.errors <= r.max_out_degree);
        }
    }
}
