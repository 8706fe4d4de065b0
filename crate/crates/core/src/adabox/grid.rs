//! Sparse box grid over an embedding, density thresholding and cell merging.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::spectral::Embedding;
use crate::knn::UndirectedGraph;

/// Integer bin per embedding axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex(pub Vec<u32>);

/// Cells of every point plus the occupancy of each occupied cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAssignment {
    pub cells: Vec<CellIndex>,
    pub counts: BTreeMap<CellIndex, usize>,
}

/// Splits each axis's `[min, max]` into `r` equal bins; the maximum falls in
/// the last bin, and a constant axis maps to bin 0.
pub fn grid_assign(e: &Embedding, r: usize) -> GridAssignment {
    assert!(r >= 2, "grid resolution must be at least 2");
    let (n, m) = (e.n(), e.m());
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for i in 0..n {
        for (a, &v) in e.point(i).iter().enumerate() {
            lo[a] = lo[a].min(v);
            hi[a] = hi[a].max(v);
        }
    }
    let last = (r - 1) as u32;
    let cells: Vec<CellIndex> = (0..n)
        .map(|i| {
            CellIndex(
                e.point(i)
                    .iter()
                    .enumerate()
                    .map(|(a, &v)| {
                        let width = hi[a] - lo[a];
                        if width <= 0.0 {
                            0
                        } else {
                            let b = ((v - lo[a]) / width * r as f64).floor();
                            (b.max(0.0) as u32).min(last)
                        }
                    })
                    .collect(),
            )
        })
        .collect();
    let mut counts = BTreeMap::new();
    for c in &cells {
        *counts.entry(c.clone()).or_insert(0) += 1;
    }
    GridAssignment { cells, counts }
}

/// Nearest-rank empirical quantile of a non-empty sample.
pub fn nearest_rank(sorted: &[usize], q: f64) -> usize {
    let n = sorted.len();
    let rank = (q * n as f64).ceil().max(1.0) as usize;
    sorted[rank.min(n) - 1]
}

/// Cells whose count reaches `max(tau_abs, quantile_{tau_q}(counts))`.
pub fn dense_cells(counts: &BTreeMap<CellIndex, usize>, tau_q: f64, tau_abs: usize) -> BTreeSet<CellIndex> {
    if counts.is_empty() {
        return BTreeSet::new();
    }
    let mut sorted: Vec<usize> = counts.values().copied().collect();
    sorted.sort_unstable();
    let threshold = tau_abs.max(nearest_rank(&sorted, tau_q));
    counts
        .iter()
        .filter(|(_, &c)| c >= threshold)
        .map(|(cell, _)| cell.clone())
        .collect()
}

/// Disjoint sets with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Connected groups of dense cells. Two cells join when they are face
/// adjacent, or when at least `e_min` mutual-kNN edges run between their
/// points (`e_min = 0` turns the graph rule off). Clusters are numbered by
/// their smallest point index.
pub fn merge_cells(
    dense: &BTreeSet<CellIndex>,
    assignments: &[CellIndex],
    g_mutual: &UndirectedGraph,
    e_min: usize,
) -> BTreeMap<CellIndex, usize> {
    let ids: HashMap<&CellIndex, usize> = dense.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let cells: Vec<&CellIndex> = dense.iter().collect();
    let mut uf = UnionFind::new(cells.len());

    for (id, cell) in cells.iter().enumerate() {
        let mut probe = cell.0.clone();
        for axis in 0..probe.len() {
            let orig = probe[axis];
            probe[axis] = orig + 1;
            if let Some(&other) = ids.get(&CellIndex(probe.clone())) {
                uf.union(id, other);
            }
            probe[axis] = orig;
        }
    }

    if e_min > 0 {
        let point_cell: Vec<Option<usize>> = assignments.iter().map(|c| ids.get(c).copied()).collect();
        let mut cross: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (i, j) in g_mutual.edges() {
            if let (Some(a), Some(b)) = (point_cell[i], point_cell[j]) {
                if a != b {
                    *cross.entry((a.min(b), a.max(b))).or_insert(0) += 1;
                }
            }
        }
        for ((a, b), count) in cross {
            if count >= e_min {
                uf.union(a, b);
            }
        }
    }

    let mut root_label: HashMap<usize, usize> = HashMap::new();
    let mut out = BTreeMap::new();
    for cell in assignments {
        if let Some(&id) = ids.get(cell) {
            let root = uf.find(id);
            let next = root_label.len();
            let label = *root_label.entry(root).or_insert(next);
            out.entry(cell.clone()).or_insert(label);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(v: &[u32]) -> CellIndex {
        CellIndex(v.to_vec())
    }

    #[test]
    fn midpoint_rule_right_edge_closed() {
        let e = Embedding::from_coords(3, 1, vec![0.0, 0.5, 1.0]).unwrap();
        let g = grid_assign(&e, 2);
        assert_eq!(g.cells, vec![cell(&[0]), cell(&[1]), cell(&[1])]);
        assert_eq!(g.counts.len(), 2);
    }

    #[test]
    fn constant_axis_is_one_cell() {
        let e = Embedding::from_coords(4, 2, vec![0.3; 8]).unwrap();
        let g = grid_assign(&e, 5);
        assert_eq!(g.counts.len(), 1);
        assert_eq!(g.counts[&cell(&[0, 0])], 4);
    }

    #[test]
    fn corners_are_distinct() {
        let e = Embedding::from_coords(4, 2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(grid_assign(&e, 2).counts.len(), 4);
    }

    #[test]
    fn nearest_rank_threshold() {
        let counts: BTreeMap<_, _> = [(cell(&[0]), 10), (cell(&[1]), 1)].into_iter().collect();
        assert_eq!(nearest_rank(&[1, 10], 0.5), 1);
        let d = dense_cells(&counts, 0.5, 2);
        assert_eq!(d.into_iter().collect::<Vec<_>>(), vec![cell(&[0])]);
        assert_eq!(dense_cells(&counts, 0.0, 1).len(), 2);
        let one: BTreeMap<_, _> = [(cell(&[3]), 4)].into_iter().collect();
        assert_eq!(dense_cells(&one, 0.9, 4).len(), 1);
        assert_eq!(dense_cells(&one, 0.9, 5).len(), 0);
    }

    #[test]
    fn face_adjacent_cells_merge() {
        let dense: BTreeSet<_> = [cell(&[3]), cell(&[4])].into_iter().collect();
        let assign = vec![cell(&[3]), cell(&[4])];
        let g = UndirectedGraph::from_edges(2, &[]).unwrap();
        let m = merge_cells(&dense, &assign, &g, 1);
        assert_eq!(m[&cell(&[3])], m[&cell(&[4])]);
    }

    #[test]
    fn diagonal_cells_do_not_merge() {
        let dense: BTreeSet<_> = [cell(&[0, 0]), cell(&[1, 1])].into_iter().collect();
        let assign = vec![cell(&[0, 0]), cell(&[1, 1])];
        let g = UndirectedGraph::from_edges(2, &[]).unwrap();
        let m = merge_cells(&dense, &assign, &g, 0);
        assert_ne!(m[&cell(&[0, 0])], m[&cell(&[1, 1])]);
    }

    #[test]
    fn mutual_edges_bridge_distant_cells() {
        // points 0..3 in bin 3, points 3..6 in bin 7
        let assign: Vec<_> = [3, 3, 3, 7, 7, 7].iter().map(|&b| cell(&[b])).collect();
        let dense: BTreeSet<_> = [cell(&[3]), cell(&[7])].into_iter().collect();

        let none = UndirectedGraph::from_edges(6, &[(0, 1), (3, 4)]).unwrap();
        let m = merge_cells(&dense, &assign, &none, 1);
        assert_ne!(m[&cell(&[3])], m[&cell(&[7])]);

        let two = UndirectedGraph::from_edges(6, &[(0, 1), (3, 4), (0, 3), (2, 5)]).unwrap();
        let m = merge_cells(&dense, &assign, &two, 2);
        assert_eq!(m[&cell(&[3])], m[&cell(&[7])]);
        let m = merge_cells(&dense, &assign, &two, 3);
        assert_ne!(m[&cell(&[3])], m[&cell(&[7])]);
        // disabled graph rule
        let m = merge_cells(&dense, &assign, &two, 0);
        assert_ne!(m[&cell(&[3])], m[&cell(&[7])]);
    }

    #[test]
    fn clusters_numbered_by_first_point() {
        let assign: Vec<_> = [9, 1, 9, 1].iter().map(|&b| cell(&[b])).collect();
        let dense: BTreeSet<_> = [cell(&[1]), cell(&[9])].into_iter().collect();
        let g = UndirectedGraph::from_edges(4, &[]).unwrap();
        let m = merge_cells(&dense, &assign, &g, 0);
        assert_eq!(m[&cell(&[9])], 0);
        assert_eq!(m[&cell(&[1])], 1);
    }

    #[test]
    fn union_find_basics() {
        let mut uf = UnionFind::new(5);
        assert!(uf.union(0, 1));
        assert!(uf.union(3, 4));
        assert!(!uf.union(1, 0));
        assert_eq!(uf.find(0), uf.find(1));
        assert_ne!(uf.find(1), uf.find(3));
        uf.union(1, 4);
        assert_eq!(uf.find(0), uf.find(3));
    }
}
