use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::domain::{Alphabet, Dataset, Instance, Label};
use crate::error::{Error, Result};

/// An explicit hypothesis class: one row of labels per hypothesis, one
/// column per instance of a finite universe.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteClass {
    columns: Vec<Instance>,
    rows: Vec<Vec<Label>>,
    alphabet: usize,
    index: HashMap<Instance, usize>,
}

/// On-disk form: column keys plus a matrix of external label values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassFile {
    pub columns: Vec<Instance>,
    pub rows: Vec<Vec<i64>>,
}

impl FiniteClass {
    /// Validates the table: distinct columns, rectangular, entries below
    /// `alphabet`, no repeated rows.
    pub fn new(columns: Vec<Instance>, rows: Vec<Vec<Label>>, alphabet: usize) -> Result<Self> {
        let mut index = HashMap::with_capacity(columns.len());
        for (i, c) in columns.iter().enumerate() {
            if index.insert(c.clone(), i).is_some() {
                return Err(Error::InvalidParams(format!("column {c} appears twice")));
            }
        }
        let mut seen = HashSet::with_capacity(rows.len());
        for (r, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::InvalidParams(format!(
                    "row {r} has {} entries for {} columns",
                    row.len(),
                    columns.len()
                )));
            }
            if let Some(l) = row.iter().find(|l| l.index() >= alphabet) {
                return Err(Error::LabelOutOfRange(*l));
            }
            if !seen.insert(row.as_slice()) {
                return Err(Error::InvalidParams(format!("row {r} duplicates an earlier row")));
            }
        }
        Ok(FiniteClass {
            columns,
            rows,
            alphabet,
            index,
        })
    }

    /// Like [`FiniteClass::new`] but drops repeated rows, keeping first
    /// occurrences in order.
    pub fn dedup(columns: Vec<Instance>, rows: Vec<Vec<Label>>, alphabet: usize) -> Result<Self> {
        let mut seen = HashSet::with_capacity(rows.len());
        let rows: Vec<Vec<Label>> = rows.into_iter().filter(|r| seen.insert(r.clone())).collect();
        Self::new(columns, rows, alphabet)
    }

    /// Every function `[p]^n` on columns `c0..c{n-1}`.
    pub fn full(p: usize, n: usize) -> Self {
        let mut rows = vec![Vec::new()];
        for _ in 0..n {
            rows = rows
                .into_iter()
                .flat_map(|r: Vec<Label>| {
                    (0..p).map(move |v| {
                        let mut r = r.clone();
                        r.push(Label::from_index(v));
                        r
                    })
                })
                .collect();
        }
        Self::new(default_columns(n), rows, p).expect("full class is valid")
    }

    /// Rows given as small integers on columns `c0..c{n-1}`.
    pub fn from_table(rows: &[&[u32]], alphabet: usize) -> Result<Self> {
        let n = rows.first().map_or(0, |r| r.len());
        let rows = rows.iter().map(|r| r.iter().map(|&v| Label(v)).collect()).collect();
        Self::new(default_columns(n), rows, alphabet)
    }

    pub fn from_file(file: ClassFile, alphabet: &Alphabet) -> Result<Self> {
        let rows = file
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&v| {
                        alphabet
                            .dense_of(v)
                            .ok_or_else(|| Error::InvalidParams(format!("class label {v} is not in the alphabet")))
                    })
                    .collect::<Result<Vec<Label>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.columns, rows, alphabet.len())
    }

    pub fn to_file(&self, alphabet: &Alphabet) -> ClassFile {
        ClassFile {
            columns: self.columns.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&l| alphabet.external(l)).collect())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn columns(&self) -> &[Instance] {
        &self.columns
    }

    pub fn column_of(&self, x: &Instance) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn rows(&self) -> &[Vec<Label>] {
        &self.rows
    }

    pub fn row(&self, r: usize) -> &[Label] {
        &self.rows[r]
    }

    pub fn value(&self, row: usize, col: usize) -> Label {
        self.rows[row][col]
    }

    /// Column index for every example, or `UnknownInstance`.
    pub fn columns_for(&self, dataset: &Dataset) -> Result<Vec<usize>> {
        dataset
            .examples()
            .iter()
            .map(|e| {
                self.column_of(&e.instance)
                    .ok_or_else(|| Error::UnknownInstance(e.instance.to_string()))
            })
            .collect()
    }

    /// Rows that agree with every labeled example.
    pub fn consistent_rows(&self, dataset: &Dataset) -> Result<Vec<usize>> {
        let cols = self.columns_for(dataset)?;
        Ok((0..self.len())
            .filter(|&r| {
                cols.iter()
                    .zip(dataset.examples())
                    .all(|(&c, e)| self.rows[r][c] == e.label)
            })
            .collect())
    }

    /// Restriction to the given columns with repeated patterns removed.
    pub fn project(&self, cols: &[usize]) -> FiniteClass {
        let columns = cols.iter().map(|&c| self.columns[c].clone()).collect();
        let rows = self.rows.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect();
        Self::dedup(columns, rows, self.alphabet).expect("projection of a valid class")
    }

    /// The class with the given rows removed.
    pub fn without_rows(&self, drop: &[usize]) -> FiniteClass {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .filter(|(r, _)| !drop.contains(r))
            .map(|(_, r)| r.clone())
            .collect();
        Self::new(self.columns.clone(), rows, self.alphabet).expect("subclass is valid")
    }
}

pub(crate) fn default_columns(n: usize) -> Vec<Instance> {
    (0..n).map(|i| Instance::key(format!("c{i}"))).collect()
}
