use std::collections::HashMap;

use crate::domain::Label;

use super::FiniteClass;

/// Masked coordinate in an edge key.
const MASK: Label = Label(u32::MAX);

/// `e_{i,f}`: the hypotheses that agree with `f` off coordinate `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hyperedge {
    pub direction: usize,
    /// Row indices, ascending.
    pub members: Vec<usize>,
}

impl Hyperedge {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// The one-inclusion hypergraph of a finite class. Vertices are row
/// indices; every vertex lies in exactly one edge per direction.
#[derive(Clone, Debug)]
pub struct OneInclusionGraph {
    n_vertices: usize,
    n_directions: usize,
    edges: Vec<Hyperedge>,
    /// `incidence[v][i]`: the edge of `v` in direction `i`.
    incidence: Vec<Vec<usize>>,
    lookup: HashMap<(usize, Vec<Label>), usize>,
}

fn masked(row: &[Label], i: usize) -> Vec<Label> {
    let mut key = row.to_vec();
    key[i] = MASK;
    key
}

/// Groups rows by (direction, pattern off that direction), keeping edges
/// of size one.
pub fn build_oig(class: &FiniteClass) -> OneInclusionGraph {
    let n = class.n_columns();
    let mut edges = Vec::new();
    let mut incidence = vec![Vec::with_capacity(n); class.len()];
    let mut lookup = HashMap::new();
    for i in 0..n {
        for (v, row) in class.rows().iter().enumerate() {
            let id = *lookup.entry((i, masked(row, i))).or_insert_with(|| {
                edges.push(Hyperedge {
                    direction: i,
                    members: Vec::new(),
                });
                edges.len() - 1
            });
            edges[id].members.push(v);
            incidence[v].push(id);
        }
    }
    OneInclusionGraph {
        n_vertices: class.len(),
        n_directions: n,
        edges,
        incidence,
        lookup,
    }
}

impl OneInclusionGraph {
    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_directions(&self) -> usize {
        self.n_directions
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Hyperedge {
        &self.edges[e]
    }

    /// Edge ids of `v`, indexed by direction.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    /// Number of edges at `v` with more than `k` members.
    pub fn k_degree(&self, v: usize, k: usize) -> usize {
        self.incidence[v].iter().filter(|&&e| self.edges[e].len() > k).count()
    }

    /// The direction-`i` edge of any row matching `pattern` off `i`.
    pub fn edge_of(&self, direction: usize, pattern: &[Label]) -> Option<usize> {
        if direction >= self.n_directions || pattern.len() != self.n_directions {
            return None;
        }
        self.lookup.get(&(direction, masked(pattern, direction))).copied()
    }
}
