//! The state complex: one vertex per state, one edge per pair of states
//! joined by a positive transition in either direction.
//!
//! Vertices lie below edges in the face order, so a set is closed when it
//! contains both endpoints of each of its edges.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::markov::TransitionMatrix;

/// A cell of the state complex. State indices are 0-based.
///
/// The derived order is the canonical order: all vertices by index, then all
/// edges lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    Vertex(usize),
    /// Always stored with the smaller index first.
    Edge(usize, usize),
}

impl Cell {
    /// Edge between two distinct states, normalized so that `i < j`.
    pub fn edge(a: usize, b: usize) -> Cell {
        assert_ne!(a, b, "loop edges are not cells");
        Cell::Edge(a.min(b), a.max(b))
    }

    pub fn is_vertex(self) -> bool {
        matches!(self, Cell::Vertex(_))
    }

    pub fn is_edge(self) -> bool {
        matches!(self, Cell::Edge(..))
    }

    /// Boundary vertices; empty for a vertex.
    pub fn faces(self) -> Vec<Cell> {
        match self {
            Cell::Vertex(_) => Vec::new(),
            Cell::Edge(i, j) => vec![Cell::Vertex(i), Cell::Vertex(j)],
        }
    }
}

/// `N1`, `N2-N3`, … (1-based).
impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Cell::Vertex(i) => write!(f, "N{}", i + 1),
            Cell::Edge(i, j) => write!(f, "N{}-N{}", i + 1, j + 1),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A set of cells iterated in canonical order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CellSet(BTreeSet<Cell>);

impl CellSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, cell: Cell) -> bool {
        self.0.insert(cell)
    }

    pub fn contains(&self, cell: &Cell) -> bool {
        self.0.contains(cell)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Cell> + '_ {
        self.0.iter().copied()
    }

    /// Smallest cell in canonical order.
    pub fn first(&self) -> Option<Cell> {
        self.0.first().copied()
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.iter().filter_map(|c| match c {
            Cell::Vertex(i) => Some(i),
            Cell::Edge(..) => None,
        })
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.iter().filter_map(|c| match c {
            Cell::Edge(i, j) => Some((i, j)),
            Cell::Vertex(_) => None,
        })
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &CellSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn union(&self, other: &CellSet) -> CellSet {
        CellSet(self.0.union(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &CellSet) -> CellSet {
        CellSet(self.0.intersection(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &CellSet) -> CellSet {
        CellSet(self.0.difference(&other.0).copied().collect())
    }

    pub fn extend<I: IntoIterator<Item = Cell>>(&mut self, cells: I) {
        self.0.extend(cells)
    }
}

impl FromIterator<Cell> for CellSet {
    fn from_iter<I: IntoIterator<Item = Cell>>(iter: I) -> Self {
        CellSet(iter.into_iter().collect())
    }
}

impl<const N: usize> From<[Cell; N]> for CellSet {
    fn from(cells: [Cell; N]) -> Self {
        cells.into_iter().collect()
    }
}

impl fmt::Display for CellSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, c) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("}")
    }
}

/// The 1-dimensional complex of a transition matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateComplex {
    n: usize,
    /// Sorted, `i < j`.
    edges: Vec<(usize, usize)>,
}

impl StateComplex {
    /// Builds the complex directly from a vertex count and an edge list.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(a, b)| {
                assert!(a != b && a < n && b < n, "invalid edge ({a}, {b})");
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        Self { n, edges }
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_cells(&self) -> usize {
        self.n + self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// All cells in canonical order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.n)
            .map(Cell::Vertex)
            .chain(self.edges.iter().map(|&(i, j)| Cell::Edge(i, j)))
    }

    pub fn all_cells(&self) -> CellSet {
        self.cells().collect()
    }

    /// Position of `cell` in the canonical order, if it belongs to the complex.
    pub fn cell_index(&self, cell: Cell) -> Option<usize> {
        match cell {
            Cell::Vertex(i) => (i < self.n).then_some(i),
            Cell::Edge(i, j) => self.edges.binary_search(&(i, j)).ok().map(|k| self.n + k),
        }
    }

    /// Inverse of [`cell_index`](Self::cell_index).
    pub fn cell_at(&self, index: usize) -> Cell {
        if index < self.n {
            Cell::Vertex(index)
        } else {
            let (i, j) = self.edges[index - self.n];
            Cell::Edge(i, j)
        }
    }

    pub fn contains(&self, cell: Cell) -> bool {
        self.cell_index(cell).is_some()
    }

    pub fn contains_all(&self, set: &CellSet) -> bool {
        set.iter().all(|c| self.contains(c))
    }

    /// `set` together with every face of its cells.
    pub fn closure(&self, set: &CellSet) -> CellSet {
        debug_assert!(self.contains_all(set));
        let mut out = set.clone();
        for (i, j) in set.edges() {
            out.insert(Cell::Vertex(i));
            out.insert(Cell::Vertex(j));
        }
        out
    }

    /// `closure(set) \ set`.
    pub fn mouth(&self, set: &CellSet) -> CellSet {
        self.closure(set).difference(set)
    }

    pub fn is_closed(&self, set: &CellSet) -> bool {
        set.edges()
            .all(|(i, j)| set.contains(&Cell::Vertex(i)) && set.contains(&Cell::Vertex(j)))
    }

    /// A set is locally closed when its mouth is closed. Vertex sets are
    /// always closed here, so this holds iff the mouth has no edge.
    pub fn is_locally_closed(&self, set: &CellSet) -> bool {
        let mouth = self.mouth(set);
        mouth.edges().next().is_none() && self.is_closed(&mouth)
    }
}

/// Vertices for all states, and an edge `{i, j}` whenever `p_ij > 0` or
/// `p_ji > 0`. Diagonal entries produce no cells.
pub fn build_complex(matrix: &TransitionMatrix) -> StateComplex {
    let n = matrix.n();
    let edges = (0..n).flat_map(|i| {
        (i + 1..n)
            .filter(move |&j| matrix.get(i, j) > 0.0 || matrix.get(j, i) > 0.0)
            .map(move |j| (i, j))
    });
    StateComplex::from_edges(n, edges)
}
