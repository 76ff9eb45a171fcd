//! Multivector fields built from a transition matrix at a threshold.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::complex::{Cell, CellSet, StateComplex};
use crate::markov::TransitionMatrix;
use crate::union_find::UnionFind;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("multivector fields are defined over different complexes")]
    ComplexMismatch,
}

/// A non-empty block of a multivector field.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Multivector {
    cells: CellSet,
}

impl Multivector {
    pub fn new(cells: CellSet) -> Self {
        assert!(!cells.is_empty(), "multivectors are non-empty");
        Self { cells }
    }

    /// Canonical label: the smallest member cell.
    pub fn id(&self) -> Cell {
        self.cells.first().expect("non-empty")
    }

    pub fn cells(&self) -> &CellSet {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// A vertex together with one incident edge.
    pub fn is_arrow(&self) -> bool {
        let mut vertices = self.cells.vertices();
        let mut edges = self.cells.edges();
        match (vertices.next(), vertices.next(), edges.next(), edges.next()) {
            (Some(v), None, Some((i, j)), None) => v == i || v == j,
            _ => false,
        }
    }
}

/// A family of multivectors at threshold `gamma`, sorted by id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultivectorField {
    gamma: f64,
    multivectors: Vec<Multivector>,
    #[serde(skip)]
    owner: BTreeMap<Cell, usize>,
}

impl MultivectorField {
    /// Wraps an arbitrary family of cell sets without checking that it is a
    /// partition; see [`is_valid_mvf`]. Where parts overlap, a cell is owned
    /// by the part with the smaller id.
    pub fn from_parts(gamma: f64, parts: impl IntoIterator<Item = CellSet>) -> Self {
        let mut multivectors: Vec<Multivector> = parts.into_iter().map(Multivector::new).collect();
        multivectors.sort_by(|a, b| a.id().cmp(&b.id()).then_with(|| a.cells.cmp(&b.cells)));
        let mut owner = BTreeMap::new();
        for (k, mv) in multivectors.iter().enumerate() {
            for c in mv.cells.iter() {
                owner.entry(c).or_insert(k);
            }
        }
        Self {
            gamma,
            multivectors,
            owner,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn multivectors(&self) -> &[Multivector] {
        &self.multivectors
    }

    pub fn len(&self) -> usize {
        self.multivectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multivectors.is_empty()
    }

    /// Index into [`multivectors`](Self::multivectors) of the block holding `cell`.
    pub fn owner_of(&self, cell: Cell) -> Option<usize> {
        self.owner.get(&cell).copied()
    }

    /// `[x]_V`, the multivector containing `cell`.
    pub fn multivector_of(&self, cell: Cell) -> Option<&Multivector> {
        self.owner_of(cell).map(|k| &self.multivectors[k])
    }

    pub fn partition(&self) -> Vec<CellSet> {
        self.multivectors.iter().map(|m| m.cells.clone()).collect()
    }
}

/// Builds the field at threshold `gamma`.
///
/// Every cell starts as a singleton. For each edge `{i, j}` (`i < j`), the
/// vertex `i` joins the edge when `p_ij <= gamma` and `j` joins it when
/// `p_ji <= gamma`. Overlapping groups are then merged to a partition.
pub fn build_mvf(
    complex: &StateComplex,
    matrix: &TransitionMatrix,
    gamma: f64,
) -> MultivectorField {
    let n = complex.n_vertices();
    let mut uf = UnionFind::new(complex.n_cells());
    for (k, &(i, j)) in complex.edges().iter().enumerate() {
        let edge = n + k;
        if matrix.get(i, j) <= gamma {
            uf.union(i, edge);
        }
        if matrix.get(j, i) <= gamma {
            uf.union(j, edge);
        }
    }

    // cells are visited in canonical order, so blocks come out sorted by id
    let mut block_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut blocks: Vec<CellSet> = Vec::new();
    for (idx, cell) in complex.cells().enumerate() {
        let root = uf.find(idx);
        let b = *block_of_root.entry(root).or_insert_with(|| {
            blocks.push(CellSet::new());
            blocks.len() - 1
        });
        blocks[b].insert(cell);
    }
    MultivectorField::from_parts(gamma, blocks)
}

/// True iff the field partitions the cells of `complex` into locally closed
/// parts.
pub fn is_valid_mvf(field: &MultivectorField, complex: &StateComplex) -> bool {
    let total: usize = field.multivectors.iter().map(Multivector::len).sum();
    let mut union = CellSet::new();
    for mv in &field.multivectors {
        if mv.cells.is_empty() || !complex.contains_all(&mv.cells) {
            return false;
        }
        if !complex.is_locally_closed(&mv.cells) {
            return false;
        }
        union.extend(mv.cells.iter());
    }
    total == union.len() && union.len() == complex.n_cells()
}

/// True iff every multivector of `coarse` is a union of multivectors of
/// `fine`. Both fields must cover the same cells.
pub fn is_coarsening(
    coarse: &MultivectorField,
    fine: &MultivectorField,
) -> Result<bool, FieldError> {
    if !coarse.owner.keys().eq(fine.owner.keys()) {
        return Err(FieldError::ComplexMismatch);
    }
    Ok(fine.multivectors.iter().all(|mv| {
        let mut owners = mv.cells.iter().map(|c| coarse.owner[&c]);
        let first = owners.next();
        owners.all(|o| Some(o) == first)
    }))
}
