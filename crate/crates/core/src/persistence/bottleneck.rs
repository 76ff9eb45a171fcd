//! Exact bottleneck distance between diagrams whose points may only be
//! matched within the same index class.

use std::collections::BTreeMap;

use serde::Serialize;

use super::diagram::{PersistenceDiagram, PersistencePoint};
use super::matching::hopcroft_karp;
use crate::topology::TopologicalIndex;

/// One pair of an optimal matching. Positions refer to `points()` of the two
/// diagrams; `None` stands for the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedPair {
    pub a: Option<usize>,
    pub b: Option<usize>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bottleneck {
    /// `+inf` when some class has different numbers of essential points.
    pub distance: f64,
    pub matching: Vec<MatchedPair>,
}

pub fn bottleneck_distance(a: &PersistenceDiagram, b: &PersistenceDiagram) -> f64 {
    bottleneck(a, b).distance
}

/// Bottleneck distance with an optimal matching.
///
/// Finite points pay `max(|Δbirth|, |Δdeath|)` against each other and half
/// their persistence against the diagonal; essential points only match
/// essential points of the same class, at `|Δbirth|`.
pub fn bottleneck(a: &PersistenceDiagram, b: &PersistenceDiagram) -> Bottleneck {
    #[derive(Default)]
    struct Class {
        a_fin: Vec<usize>,
        a_inf: Vec<usize>,
        b_fin: Vec<usize>,
        b_inf: Vec<usize>,
    }
    let mut classes: BTreeMap<TopologicalIndex, Class> = BTreeMap::new();
    for (i, p) in a.points().iter().enumerate() {
        let c = classes.entry(p.index).or_default();
        if p.is_essential() {
            c.a_inf.push(i)
        } else {
            c.a_fin.push(i)
        }
    }
    for (j, q) in b.points().iter().enumerate() {
        let c = classes.entry(q.index).or_default();
        if q.is_essential() {
            c.b_inf.push(j)
        } else {
            c.b_fin.push(j)
        }
    }

    let mut distance: f64 = 0.0;
    let mut matching = Vec::new();
    for class in classes.values() {
        let d = match_essential(
            a.points(),
            b.points(),
            &class.a_inf,
            &class.b_inf,
            &mut matching,
        );
        distance = distance.max(d);
        let d = match_finite(
            a.points(),
            b.points(),
            &class.a_fin,
            &class.b_fin,
            &mut matching,
        );
        distance = distance.max(d);
    }
    Bottleneck { distance, matching }
}

/// Sorted-order matching of births, optimal for the one-dimensional
/// bottleneck problem.
fn match_essential(
    pa: &[PersistencePoint],
    pb: &[PersistencePoint],
    ia: &[usize],
    ib: &[usize],
    out: &mut Vec<MatchedPair>,
) -> f64 {
    let mut ia = ia.to_vec();
    let mut ib = ib.to_vec();
    ia.sort_by(|&x, &y| pa[x].birth.total_cmp(&pa[y].birth));
    ib.sort_by(|&x, &y| pb[x].birth.total_cmp(&pb[y].birth));
    let mut worst: f64 = 0.0;
    for (&i, &j) in ia.iter().zip(&ib) {
        let cost = (pa[i].birth - pb[j].birth).abs();
        worst = worst.max(cost);
        out.push(MatchedPair {
            a: Some(i),
            b: Some(j),
            cost,
        });
    }
    for &i in ia.iter().skip(ib.len()) {
        out.push(MatchedPair {
            a: Some(i),
            b: None,
            cost: f64::INFINITY,
        });
    }
    for &j in ib.iter().skip(ia.len()) {
        out.push(MatchedPair {
            a: None,
            b: Some(j),
            cost: f64::INFINITY,
        });
    }
    if ia.len() != ib.len() {
        f64::INFINITY
    } else {
        worst
    }
}

fn point_cost(p: &PersistencePoint, q: &PersistencePoint) -> f64 {
    (p.birth - q.birth).abs().max((p.death - q.death).abs())
}

fn diagonal_cost(p: &PersistencePoint) -> f64 {
    p.persistence() / 2.0
}

/// Binary search over the candidate costs with a perfect-matching test on the
/// graph of points plus diagonal copies.
fn match_finite(
    pa: &[PersistencePoint],
    pb: &[PersistencePoint],
    ia: &[usize],
    ib: &[usize],
    out: &mut Vec<MatchedPair>,
) -> f64 {
    let (m, k) = (ia.len(), ib.len());
    if m + k == 0 {
        return 0.0;
    }
    let cross: Vec<Vec<f64>> = ia
        .iter()
        .map(|&i| ib.iter().map(|&j| point_cost(&pa[i], &pb[j])).collect())
        .collect();
    let diag_a: Vec<f64> = ia.iter().map(|&i| diagonal_cost(&pa[i])).collect();
    let diag_b: Vec<f64> = ib.iter().map(|&j| diagonal_cost(&pb[j])).collect();

    let mut candidates: Vec<f64> = cross.iter().flatten().copied().collect();
    candidates.extend(&diag_a);
    candidates.extend(&diag_b);
    candidates.push(0.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // Left: A points, then diagonal copies of B points.
    // Right: B points, then diagonal copies of A points.
    let feasible = |eps: f64| -> Option<Vec<Option<usize>>> {
        let mut adj: Vec<Vec<usize>> = Vec::with_capacity(m + k);
        for i in 0..m {
            let mut row: Vec<usize> = (0..k).filter(|&j| cross[i][j] <= eps).collect();
            if diag_a[i] <= eps {
                row.push(k + i);
            }
            adj.push(row);
        }
        for (j, &cost) in diag_b.iter().enumerate() {
            let mut row = Vec::with_capacity(m + 1);
            if cost <= eps {
                row.push(j);
            }
            row.extend((0..m).map(|i| k + i));
            adj.push(row);
        }
        let matched = hopcroft_karp(&adj, m + k);
        matched.iter().all(Option::is_some).then_some(matched)
    };

    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let eps = candidates[lo];
    let matched = feasible(eps).expect("largest candidate is always feasible");

    for (i, partner) in matched.iter().take(m).enumerate() {
        let v = partner.expect("perfect matching");
        if v < k {
            out.push(MatchedPair {
                a: Some(ia[i]),
                b: Some(ib[v]),
                cost: cross[i][v],
            });
        } else {
            out.push(MatchedPair {
                a: Some(ia[i]),
                b: None,
                cost: diag_a[i],
            });
        }
    }
    for (j, partner) in matched.iter().skip(m).enumerate() {
        if *partner == Some(j) {
            out.push(MatchedPair {
                a: None,
                b: Some(ib[j]),
                cost: diag_b[j],
            });
        }
    }
    eps
}
