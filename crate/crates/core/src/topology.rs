//! Cellular homology over GF(2) of subsets of the state complex: homology of
//! closed sets, relative homology of (closure, mouth) pairs, and the
//! topological index of a Morse set.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{CellSet, StateComplex};
use crate::dynamics::MorseSet;
use crate::mvf::Multivector;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("cell set {0} is not closed")]
    NotClosed(String),
    #[error("cell set {0} is not locally closed")]
    NotLocallyClosed(String),
}

/// Dense bit matrix over the two-element field, row-major in 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        Self {
            rows,
            cols,
            words,
            bits: vec![0; rows * words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        self.bits[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols);
        let word = &mut self.bits[r * self.words + c / 64];
        let mask = 1u64 << (c % 64);
        if value {
            *word |= mask;
        } else {
            *word &= !mask;
        }
    }

    /// Rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut bits = self.bits.clone();
        let w = self.words;
        let mut rank = 0;
        for col in 0..self.cols {
            let (word, mask) = (col / 64, 1u64 << (col % 64));
            let Some(pivot) = (rank..self.rows).find(|&r| bits[r * w + word] & mask != 0) else {
                continue;
            };
            if pivot != rank {
                for k in 0..w {
                    bits.swap(pivot * w + k, rank * w + k);
                }
            }
            for r in 0..self.rows {
                if r != rank && bits[r * w + word] & mask != 0 {
                    for k in word..w {
                        let v = bits[rank * w + k];
                        bits[r * w + k] ^= v;
                    }
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }
}

pub fn rank_gf2(m: &Gf2Matrix) -> usize {
    m.rank()
}

/// Edge-to-vertex boundary matrix of `set`, keeping only endpoints that lie
/// in `set`. Returns the matrix and the vertex and edge counts.
fn boundary(set: &CellSet) -> (Gf2Matrix, usize, usize) {
    let col_of: BTreeMap<usize, usize> = set.vertices().enumerate().map(|(k, v)| (v, k)).collect();
    let edges: Vec<(usize, usize)> = set.edges().collect();
    let mut m = Gf2Matrix::zeros(edges.len(), col_of.len());
    for (r, &(i, j)) in edges.iter().enumerate() {
        for v in [i, j] {
            if let Some(&c) = col_of.get(&v) {
                m.set(r, c, true);
            }
        }
    }
    (m, col_of.len(), edges.len())
}

/// `(dim H0, dim H1)` of a closed set.
pub fn homology_dims(
    complex: &StateComplex,
    set: &CellSet,
) -> Result<(usize, usize), TopologyError> {
    if !complex.is_closed(set) {
        return Err(TopologyError::NotClosed(set.to_string()));
    }
    let (d, v, e) = boundary(set);
    let rank = d.rank();
    let dims = (v - rank, e - rank);
    debug_assert_eq!(
        dims,
        graph_homology_dims(set),
        "rank and graph formula disagree on {set}"
    );
    Ok(dims)
}

/// Homology of a closed set from its graph structure: `h0` is the number of
/// connected components and `h1 = |E| - |V| + h0`.
pub fn graph_homology_dims(set: &CellSet) -> (usize, usize) {
    let vertices: Vec<usize> = set.vertices().collect();
    let pos: BTreeMap<usize, usize> = vertices.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let mut adj = vec![Vec::new(); vertices.len()];
    let mut n_edges = 0;
    for (i, j) in set.edges() {
        let (a, b) = (pos[&i], pos[&j]);
        adj[a].push(b);
        adj[b].push(a);
        n_edges += 1;
    }
    let mut seen = vec![false; vertices.len()];
    let mut components = 0;
    for s in 0..vertices.len() {
        if seen[s] {
            continue;
        }
        components += 1;
        seen[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(a) = queue.pop_front() {
            for &b in &adj[a] {
                if !seen[b] {
                    seen[b] = true;
                    queue.push_back(b);
                }
            }
        }
    }
    (components, n_edges + components - vertices.len())
}

/// `(dim H0, dim H1)` of the pair `(cl A, mo A)` for a locally closed `A`.
///
/// The relative chains are spanned by the cells of `A`; the boundary of an
/// edge keeps only the endpoints that belong to `A`.
pub fn conley_index_dims(
    complex: &StateComplex,
    set: &CellSet,
) -> Result<(usize, usize), TopologyError> {
    if !complex.is_locally_closed(set) {
        return Err(TopologyError::NotLocallyClosed(set.to_string()));
    }
    Ok(relative_dims(set))
}

fn relative_dims(set: &CellSet) -> (usize, usize) {
    let (d, v, e) = boundary(set);
    let rank = d.rank();
    (v - rank, e - rank)
}

/// `(dim H1(cl M), dim H1(cl M, mo M))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct TopologicalIndex {
    pub h1: usize,
    pub c1: usize,
}

impl TopologicalIndex {
    pub const fn new(h1: usize, c1: usize) -> Self {
        Self { h1, c1 }
    }
}

impl From<[usize; 2]> for TopologicalIndex {
    fn from([h1, c1]: [usize; 2]) -> Self {
        Self { h1, c1 }
    }
}

impl From<TopologicalIndex> for [usize; 2] {
    fn from(k: TopologicalIndex) -> Self {
        [k.h1, k.c1]
    }
}

impl std::fmt::Display for TopologicalIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.h1, self.c1)
    }
}

pub fn topological_index_of(
    complex: &StateComplex,
    cells: &CellSet,
) -> Result<TopologicalIndex, TopologyError> {
    let (_, c1) = conley_index_dims(complex, cells)?;
    let (_, h1) = homology_dims(complex, &complex.closure(cells))?;
    Ok(TopologicalIndex { h1, c1 })
}

pub fn topological_index(
    complex: &StateComplex,
    set: &MorseSet,
) -> Result<TopologicalIndex, TopologyError> {
    topological_index_of(complex, &set.cells)
}

/// A multivector is critical when its relative homology is non-trivial.
pub fn is_critical(complex: &StateComplex, mv: &Multivector) -> bool {
    debug_assert!(complex.is_locally_closed(mv.cells()));
    let (c0, c1) = relative_dims(mv.cells());
    c0 + c1 > 0
}
