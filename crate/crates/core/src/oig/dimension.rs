use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::orientation::next_combination;
use super::FiniteClass;
use crate::domain::Label;
use crate::error::{Error, Result};

/// Default cap on the number of column subsets examined.
pub const DEFAULT_DIMENSION_BUDGET: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub k: usize,
    pub d: usize,
    /// Columns of the witnessing subsequence.
    pub columns: Vec<usize>,
    /// Restricted patterns that survive deletion on those columns.
    pub witness: Vec<Vec<Label>>,
}

/// Largest subfamily of `patterns` in which every member has at least `k`
/// neighbors in every direction (empty when none exists).
pub fn neighbor_core(patterns: &[Vec<Label>], k: usize) -> Vec<Vec<Label>> {
    let n = patterns.first().map_or(0, |p| p.len());
    let mut alive: Vec<bool> = vec![true; patterns.len()];
    loop {
        let mut changed = false;
        for i in 0..n {
            let mut groups: HashMap<Vec<Label>, usize> = HashMap::new();
            let key = |p: &Vec<Label>| {
                let mut q = p.clone();
                q[i] = Label(u32::MAX);
                q
            };
            for (p, _) in patterns.iter().zip(&alive).filter(|(_, &a)| a) {
                *groups.entry(key(p)).or_default() += 1;
            }
            for (p, a) in patterns.iter().zip(alive.iter_mut()) {
                if *a && groups[&key(p)] - 1 < k {
                    *a = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    patterns
        .iter()
        .zip(alive)
        .filter(|(_, a)| *a)
        .map(|(p, _)| p.clone())
        .collect()
}

/// The `k`-DS dimension: the longest column subsequence on which the
/// restricted class keeps a non-empty family where every member has `k`
/// neighbors in every direction. `k = 1` gives the DS dimension.
pub fn kds_dimension(class: &FiniteClass, k: usize, budget: u64) -> Result<DimensionReport> {
    if k == 0 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    let n = class.n_columns();
    let subsets = 2f64.powi(n as i32);
    if subsets > budget as f64 {
        return Err(Error::BudgetExceeded { size: subsets, budget });
    }
    for size in (1..=n).rev() {
        let mut pick: Vec<usize> = (0..size).collect();
        loop {
            let witness = neighbor_core(class.project(&pick).rows(), k);
            if !witness.is_empty() {
                return Ok(DimensionReport {
                    k,
                    d: size,
                    columns: pick,
                    witness,
                });
            }
            if !next_combination(&mut pick, n) {
                break;
            }
        }
    }
    Ok(DimensionReport {
        k,
        d: 0,
        columns: Vec::new(),
        witness: vec![Vec::new()],
    })
}
