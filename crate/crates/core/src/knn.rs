//! Exact kNN graphs and undirected views.
//!
//! Rows of a [`KnnGraph`] are ordered by `(distance, index)`, so ties always
//! resolve to the lower point index and construction is deterministic no
//! matter how the rows are scheduled.

use std::cmp::Ordering;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::data::{sq_dist, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KnnGraph {
    k: usize,
    n: usize,
    nbr: Vec<usize>,
    dist: Vec<f64>,
}

#[inline]
fn by_dist_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Brute-force exact Euclidean kNN, `O(n^2 d)`.
pub fn build_knn_graph(data: &Dataset, k: usize) -> Result<KnnGraph> {
    let n = data.n();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    if k == 0 || k >= n {
        return Err(Error::KOutOfRange { k, n });
    }
    let rows: Vec<Vec<(f64, usize)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = data.row(i);
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (sq_dist(xi, data.row(j)).sqrt(), j))
                .collect();
            select_smallest(&mut cand, k);
            cand
        })
        .collect();
    Ok(KnnGraph::from_sorted_rows(rows, k))
}

/// Keeps the `k` smallest candidates in `(distance, index)` order.
fn select_smallest(cand: &mut Vec<(f64, usize)>, k: usize) {
    if k < cand.len() {
        cand.select_nth_unstable_by(k - 1, by_dist_then_index);
        cand.truncate(k);
    }
    cand.sort_unstable_by(by_dist_then_index);
}

impl KnnGraph {
    fn from_sorted_rows(rows: Vec<Vec<(f64, usize)>>, k: usize) -> Self {
        let n = rows.len();
        let mut nbr = Vec::with_capacity(n * k);
        let mut dist = Vec::with_capacity(n * k);
        for row in rows {
            for (d, j) in row {
                nbr.push(j);
                dist.push(d);
            }
        }
        Self { k, n, nbr, dist }
    }

    /// Builds from explicit neighbor rows, checking every invariant.
    pub fn from_parts(k: usize, nbr: Vec<usize>, dist: Vec<f64>) -> Result<Self> {
        if k == 0 || !nbr.len().is_multiple_of(k) || nbr.len() != dist.len() {
            return Err(Error::InvalidGraph("neighbor matrix shape".into()));
        }
        let n = nbr.len() / k;
        for i in 0..n {
            let row = &nbr[i * k..(i + 1) * k];
            let drow = &dist[i * k..(i + 1) * k];
            for j in 0..k {
                if row[j] >= n || row[j] == i {
                    return Err(Error::InvalidGraph(format!("bad neighbor {} in row {i}", row[j])));
                }
                if !(drow[j].is_finite() && drow[j] >= 0.0) {
                    return Err(Error::InvalidGraph(format!("bad distance in row {i}")));
                }
                if j > 0
                    && by_dist_then_index(&(drow[j - 1], row[j - 1]), &(drow[j], row[j]))
                        != Ordering::Less
                {
                    return Err(Error::InvalidGraph(format!("row {i} is not sorted")));
                }
            }
        }
        Ok(Self { k, n, nbr, dist })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.nbr[i * self.k..(i + 1) * self.k]
    }

    pub fn distances(&self, i: usize) -> &[f64] {
        &self.dist[i * self.k..(i + 1) * self.k]
    }

    /// The graph for a smaller `k`. Rows are sorted, so this equals a fresh
    /// build with `k`.
    pub fn truncate(&self, k: usize) -> Result<KnnGraph> {
        if k == 0 || k > self.k {
            return Err(Error::KOutOfRange { k, n: self.n });
        }
        let mut nbr = Vec::with_capacity(self.n * k);
        let mut dist = Vec::with_capacity(self.n * k);
        for i in 0..self.n {
            nbr.extend_from_slice(&self.neighbors(i)[..k]);
            dist.extend_from_slice(&self.distances(i)[..k]);
        }
        Ok(Self { k, n: self.n, nbr, dist })
    }

    /// Writes `src,dst,dist` rows for every directed edge.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = Vec::with_capacity(self.nbr.len() * 16);
        let _ = writeln!(out, "src,dst,dist");
        for i in 0..self.n {
            for (j, d) in self.neighbors(i).iter().zip(self.distances(i)) {
                let _ = writeln!(out, "{i},{j},{d:?}");
            }
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Undirected simple graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    adj: Vec<Vec<usize>>,
    m: usize,
}

impl UndirectedGraph {
    /// Builds from an edge list; duplicates collapse, self loops are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a},{b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self loop at {a}")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        Ok(Self::from_adjacency(adj))
    }

    fn from_adjacency(mut adj: Vec<Vec<usize>>) -> Self {
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        let m = adj.iter().map(Vec::len).sum::<usize>() / 2;
        Self { adj, m }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    /// Undirected edge count.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    /// Each undirected edge once, as `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&j).is_ok()
    }
}

/// Union view: `{i, j}` is an edge when either `i -> j` or `j -> i`.
pub fn symmetrize(g: &KnnGraph) -> UndirectedGraph {
    let mut adj = vec![Vec::with_capacity(2 * g.k); g.n];
    for i in 0..g.n {
        for &j in g.neighbors(i) {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    UndirectedGraph::from_adjacency(adj)
}

/// Mutual view: `{i, j}` is an edge only when both `i -> j` and `j -> i`.
pub fn mutual_graph(g: &KnnGraph) -> UndirectedGraph {
    let mut adj = vec![Vec::new(); g.n];
    for i in 0..g.n {
        for &j in g.neighbors(i) {
            if g.neighbors(j).contains(&i) {
                adj[i].push(j);
            }
        }
    }
    UndirectedGraph::from_adjacency(adj)
}

/// Directed in-degree of every node; sums to `n k`.
pub fn density_scores(g: &KnnGraph) -> Vec<f64> {
    let mut indeg = vec![0usize; g.n];
    for &j in &g.nbr {
        indeg[j] += 1;
    }
    indeg.into_iter().map(|c| c as f64).collect()
}
