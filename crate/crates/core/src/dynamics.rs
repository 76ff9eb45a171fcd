//! The graph of a multivector field and its Morse decomposition.

use serde::Serialize;

use crate::complex::{Cell, CellSet, StateComplex};
use crate::mvf::MultivectorField;

/// `[x]_V ∪ cl {x}`: the cells reachable from `x` in one step.
pub fn pi_map(field: &MultivectorField, complex: &StateComplex, x: Cell) -> CellSet {
    let mut out = complex.closure(&CellSet::from([x]));
    if let Some(mv) = field.multivector_of(x) {
        out.extend(mv.cells().iter());
    }
    out
}

/// Directed graph on the multivectors of a field. Node `k` is the `k`-th
/// multivector of the field; every node carries a self-loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MGraph {
    nodes: Vec<Cell>,
    succ: Vec<Vec<usize>>,
}

impl MGraph {
    /// Node labels (multivector ids).
    pub fn nodes(&self) -> &[Cell] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sorted successors of `node`, itself included.
    pub fn successors(&self, node: usize) -> &[usize] {
        &self.succ[node]
    }

    pub fn has_arc(&self, from: usize, to: usize) -> bool {
        self.succ[from].binary_search(&to).is_ok()
    }

    /// Arcs between distinct nodes, as label pairs.
    pub fn arcs(&self) -> Vec<(Cell, Cell)> {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(v, ws)| {
                ws.iter()
                    .filter(move |&&w| w != v)
                    .map(move |&w| (self.nodes[v], self.nodes[w]))
            })
            .collect()
    }
}

/// Arc `V -> W` for `V != W` whenever `W` meets the mouth of `V`.
pub fn build_mgraph(field: &MultivectorField, complex: &StateComplex) -> MGraph {
    let nodes: Vec<Cell> = field.multivectors().iter().map(|m| m.id()).collect();
    let succ = field
        .multivectors()
        .iter()
        .enumerate()
        .map(|(v, mv)| {
            let mut out: Vec<usize> = complex
                .mouth(mv.cells())
                .iter()
                .filter_map(|c| field.owner_of(c))
                .collect();
            out.push(v);
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect();
    MGraph { nodes, succ }
}

/// One strongly connected component of the M-graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MorseSet {
    /// Smallest cell of the set.
    pub label: Cell,
    pub cells: CellSet,
    /// Ids of the member multivectors.
    pub members: Vec<Cell>,
    /// Indices of the member nodes in the M-graph.
    #[serde(skip)]
    pub nodes: Vec<usize>,
}

/// Strongly connected components, each as a sorted node list, in reverse
/// topological order of the condensation.
pub fn strongly_connected_components(graph: &MGraph) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = graph.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next = 0;
    let mut out = Vec::new();
    // explicit call stack of (node, next successor position)
    let mut frames: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        frames.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
            if let Some(&w) = graph.succ[v].get(*pos) {
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            frames.pop();
            if let Some(&(parent, _)) = frames.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                out.push(comp);
            }
        }
    }
    out
}

/// Morse sets of the field, sorted by label. Every component counts,
/// singletons included, since each node has a self-loop.
pub fn morse_sets(graph: &MGraph, field: &MultivectorField) -> Vec<MorseSet> {
    let mut sets: Vec<MorseSet> = strongly_connected_components(graph)
        .into_iter()
        .map(|nodes| {
            let mut cells = CellSet::new();
            for &k in &nodes {
                cells.extend(field.multivectors()[k].cells().iter());
            }
            MorseSet {
                label: cells.first().expect("multivectors are non-empty"),
                members: nodes.iter().map(|&k| graph.nodes[k]).collect(),
                cells,
                nodes,
            }
        })
        .collect();
    sets.sort_by_key(|s| s.label);
    sets
}

/// Reachability order on Morse sets: `p` is above `q` when a path of arcs
/// leads from `p` to `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorseOrder {
    labels: Vec<Cell>,
    /// `reach[p][q]` iff `q` is reachable from `p` (reflexive).
    reach: Vec<Vec<bool>>,
}

impl MorseOrder {
    pub fn labels(&self) -> &[Cell] {
        &self.labels
    }

    /// `above >= below` in the order, by position in `labels`.
    pub fn is_above(&self, above: usize, below: usize) -> bool {
        self.reach[above][below]
    }

    /// Strict relations `(above, below)` in label order.
    pub fn pairs(&self) -> Vec<(Cell, Cell)> {
        let n = self.labels.len();
        (0..n)
            .flat_map(|p| (0..n).map(move |q| (p, q)))
            .filter(|&(p, q)| p != q && self.reach[p][q])
            .map(|(p, q)| (self.labels[p], self.labels[q]))
            .collect()
    }
}

pub fn morse_order(graph: &MGraph, sets: &[MorseSet]) -> MorseOrder {
    let mut comp_of = vec![usize::MAX; graph.len()];
    for (s, set) in sets.iter().enumerate() {
        for &v in &set.nodes {
            comp_of[v] = s;
        }
    }
    let k = sets.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); k];
    for v in 0..graph.len() {
        for &w in graph.successors(v) {
            let (a, b) = (comp_of[v], comp_of[w]);
            if a != b {
                succ[a].push(b);
            }
        }
    }
    let reach = (0..k)
        .map(|start| {
            let mut seen = vec![false; k];
            let mut todo = vec![start];
            seen[start] = true;
            while let Some(a) = todo.pop() {
                for &b in &succ[a] {
                    if !seen[b] {
                        seen[b] = true;
                        todo.push(b);
                    }
                }
            }
            seen
        })
        .collect();
    MorseOrder {
        labels: sets.iter().map(|s| s.label).collect(),
        reach,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_complex;
    use crate::markov::TransitionMatrix;
    use crate::mvf::build_mvf;
    use Cell::{Edge, Vertex};

    fn example() -> (TransitionMatrix, StateComplex) {
        let m = TransitionMatrix::from_rows(vec![
            vec![0.5, 0.17, 0.33],
            vec![0.17, 0.6, 0.23],
            vec![0.15, 0.15, 0.7],
        ])
        .unwrap();
        let x = build_complex(&m);
        (m, x)
    }

    fn pairs(list: &[(Cell, Cell)]) -> Vec<(Cell, Cell)> {
        let mut v = list.to_vec();
        v.sort();
        v
    }

    #[test]
    fn pi_map_examples() {
        let (m, x) = example();
        let v0 = build_mvf(&x, &m, 0.0);
        assert_eq!(
            pi_map(&v0, &x, Edge(0, 1)),
            CellSet::from([Vertex(0), Vertex(1), Edge(0, 1)])
        );
        assert_eq!(pi_map(&v0, &x, Vertex(1)), CellSet::from([Vertex(1)]));
        let v15 = build_mvf(&x, &m, 0.15);
        assert_eq!(
            pi_map(&v15, &x, Vertex(2)),
            CellSet::from([Vertex(2), Edge(0, 2), Edge(1, 2)])
        );
    }

    #[test]
    fn mgraph_at_zero() {
        let (m, x) = example();
        let g = build_mgraph(&build_mvf(&x, &m, 0.0), &x);
        assert_eq!(g.len(), 6);
        assert!((0..6).all(|v| g.has_arc(v, v)));
        assert_eq!(
            pairs(&g.arcs()),
            vec![
                (Edge(0, 1), Vertex(0)),
                (Edge(0, 1), Vertex(1)),
                (Edge(0, 2), Vertex(0)),
                (Edge(0, 2), Vertex(2)),
                (Edge(1, 2), Vertex(1)),
                (Edge(1, 2), Vertex(2)),
            ]
        );
    }

    #[test]
    fn mgraph_single_node() {
        let (m, x) = example();
        let g = build_mgraph(&build_mvf(&x, &m, 0.23), &x);
        assert_eq!(g.len(), 1);
        assert_eq!(g.successors(0), [0]);
        assert!(g.arcs().is_empty());
    }

    #[test]
    fn mgraph_at_0_15() {
        let (m, x) = example();
        let g = build_mgraph(&build_mvf(&x, &m, 0.15), &x);
        assert_eq!(g.len(), 4);
        assert_eq!(
            pairs(&g.arcs()),
            vec![
                (Vertex(2), Vertex(0)),
                (Vertex(2), Vertex(1)),
                (Edge(0, 1), Vertex(0)),
                (Edge(0, 1), Vertex(1)),
            ]
        );
    }

    #[test]
    fn morse_sets_of_example() {
        let (m, x) = example();
        let v0 = build_mvf(&x, &m, 0.0);
        let sets = morse_sets(&build_mgraph(&v0, &x), &v0);
        assert_eq!(sets.len(), 6);
        assert!(sets.iter().all(|s| s.cells.len() == 1));

        let v17 = build_mvf(&x, &m, 0.17);
        let sets = morse_sets(&build_mgraph(&v17, &x), &v17);
        let cells: Vec<CellSet> = sets.iter().map(|s| s.cells.clone()).collect();
        assert_eq!(
            cells,
            vec![
                CellSet::from([Vertex(0), Vertex(1), Edge(0, 1)]),
                CellSet::from([Vertex(2), Edge(0, 2), Edge(1, 2)]),
            ]
        );

        let v23 = build_mvf(&x, &m, 0.23);
        let sets = morse_sets(&build_mgraph(&v23, &x), &v23);
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].cells, x.all_cells());
    }

    #[test]
    fn cyclic_arrows_form_one_morse_set() {
        // 1 -> 2 -> 3 -> 1 rotation: each vertex flows along one edge
        let m = TransitionMatrix::from_rows(vec![
            vec![0.5, 0.1, 0.4],
            vec![0.4, 0.5, 0.1],
            vec![0.1, 0.4, 0.5],
        ])
        .unwrap();
        let x = build_complex(&m);
        let v = build_mvf(&x, &m, 0.1);
        assert_eq!(v.len(), 3);
        assert!(v.multivectors().iter().all(|mv| mv.is_arrow()));
        let sets = morse_sets(&build_mgraph(&v, &x), &v);
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].members.len(), 3);
    }

    #[test]
    fn order_at_zero() {
        let (m, x) = example();
        let v0 = build_mvf(&x, &m, 0.0);
        let g = build_mgraph(&v0, &x);
        let sets = morse_sets(&g, &v0);
        let order = morse_order(&g, &sets);
        assert_eq!(pairs(&order.pairs()), pairs(&g.arcs()));
    }

    #[test]
    fn order_at_0_15_and_trivial() {
        let (m, x) = example();
        let v = build_mvf(&x, &m, 0.15);
        let g = build_mgraph(&v, &x);
        let sets = morse_sets(&g, &v);
        let order = morse_order(&g, &sets);
        assert_eq!(
            pairs(&order.pairs()),
            vec![
                (Vertex(2), Vertex(0)),
                (Vertex(2), Vertex(1)),
                (Edge(0, 1), Vertex(0)),
                (Edge(0, 1), Vertex(1)),
            ]
        );

        let v = build_mvf(&x, &m, 0.5);
        let g = build_mgraph(&v, &x);
        let order = morse_order(&g, &morse_sets(&g, &v));
        assert!(order.pairs().is_empty());
        assert!(order.is_above(0, 0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn chain() -> impl Strategy<Value = TransitionMatrix> {
            (1usize..=7).prop_flat_map(|n| {
                proptest::collection::vec(
                    proptest::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], n),
                    n,
                )
                .prop_map(|raw| {
                    let rows = raw
                        .into_iter()
                        .enumerate()
                        .map(|(i, mut r)| {
                            r[i] += 0.1;
                            let s: f64 = r.iter().sum();
                            r.iter().map(|x| x / s).collect()
                        })
                        .collect();
                    TransitionMatrix::from_rows(rows).unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn decomposition_properties(m in chain(), pick in 0usize..64) {
                let x = build_complex(&m);
                let grid = m.threshold_grid();
                let gamma = grid.values()[pick % grid.len()];
                let v = build_mvf(&x, &m, gamma);
                let g = build_mgraph(&v, &x);

                // arcs agree with the one-step map
                for (a, mv) in v.multivectors().iter().enumerate() {
                    for (b, other) in v.multivectors().iter().enumerate() {
                        if a == b { continue; }
                        let via_pi = mv.cells().iter()
                            .any(|c| !pi_map(&v, &x, c).is_disjoint(other.cells()));
                        prop_assert_eq!(g.has_arc(a, b), via_pi);
                    }
                }

                let sets = morse_sets(&g, &v);
                let mut union = CellSet::new();
                let mut total = 0;
                for s in &sets {
                    total += s.cells.len();
                    union.extend(s.cells.iter());
                }
                prop_assert_eq!(total, x.n_cells());
                prop_assert_eq!(union, x.all_cells());

                let order = morse_order(&g, &sets);
                let k = sets.len();
                for p in 0..k {
                    prop_assert!(order.is_above(p, p));
                    for q in 0..k {
                        if p != q && order.is_above(p, q) {
                            prop_assert!(!order.is_above(q, p));
                        }
                        for r in 0..k {
                            if order.is_above(p, q) && order.is_above(q, r) {
                                prop_assert!(order.is_above(p, r));
                            }
                        }
                    }
                }
            }
        }
    }
}
