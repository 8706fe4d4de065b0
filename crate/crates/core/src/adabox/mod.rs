//! Adaptive box partitioning on a kNN graph embedding.
//!
//! Pipeline: kNN graph, union view, spectral embedding, box grid, dense
//! cells, merged cell groups as clusters, sparse-cell points as noise, then a
//! single noise-rescue vote over graph neighbors. Nothing after the kNN step
//! reads raw coordinates, so results are invariant to uniform rescaling.

pub mod grid;
pub mod spectral;

use serde::{Deserialize, Serialize};

pub use grid::{dense_cells, grid_assign, merge_cells, CellIndex, GridAssignment, UnionFind};
pub use spectral::{spectral_embedding, Embedding};

use crate::data::{Dataset, Labeling, NOISE};
use crate::error::{Error, Result};
use crate::knn::{build_knn_graph, mutual_graph, symmetrize, KnnGraph, UndirectedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaBoxConfig {
    /// kNN neighbor count.
    pub k_graph: usize,
    /// Embedding dimension.
    pub m: usize,
    /// Bins per embedding axis.
    pub r: usize,
    /// Density quantile of occupied-cell counts.
    pub tau_q: f64,
    /// Absolute minimum count for a dense cell.
    pub tau_abs: usize,
    /// Mutual-edge count that merges two dense cells; 0 disables.
    pub e_min: usize,
    /// Neighbor agreement needed to rescue a noise point; `None` disables.
    pub theta: Option<f64>,
}

impl Default for AdaBoxConfig {
    fn default() -> Self {
        Self {
            k_graph: 10,
            m: 2,
            r: 8,
            tau_q: 0.5,
            tau_abs: 3,
            e_min: 2,
            theta: Some(0.67),
        }
    }
}

impl AdaBoxConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.k_graph == 0 {
            return bad("k_graph must be >= 1".into());
        }
        if self.m == 0 {
            return bad("m must be >= 1".into());
        }
        if self.r < 2 {
            return bad(format!("r = {} must be >= 2", self.r));
        }
        if !(0.0..=1.0).contains(&self.tau_q) {
            return bad(format!("tau_q = {} outside [0, 1]", self.tau_q));
        }
        if self.tau_abs == 0 {
            return bad("tau_abs must be >= 1".into());
        }
        if let Some(t) = self.theta {
            if !(0.5..=1.0).contains(&t) {
                return bad(format!("theta = {t} outside [0.5, 1]"));
            }
        }
        Ok(())
    }
}

/// One frozen pass over noise points in index order: a noise point adopts a
/// cluster when that single cluster holds at least `theta` of its
/// neighbors. Votes read the provisional labels only.
pub fn noise_rescue(labels: &Labeling, g: &UndirectedGraph, theta: Option<f64>) -> Labeling {
    let Some(theta) = theta else {
        return labels.clone();
    };
    let mut out = labels.labels().to_vec();
    let mut counts = vec![0usize; labels.n_clusters()];
    for i in 0..labels.len() {
        if !labels.is_noise(i) {
            continue;
        }
        let nb = g.neighbors(i);
        if nb.is_empty() {
            continue;
        }
        for &j in nb {
            let l = labels.get(j);
            if l != NOISE {
                counts[l as usize] += 1;
            }
        }
        let mut best: Option<(i64, usize)> = None;
        let mut tied = false;
        for &j in nb {
            let l = labels.get(j);
            if l == NOISE {
                continue;
            }
            let c = counts[l as usize];
            match best {
                Some((bl, bc)) if c < bc || (c == bc && bl == l) => {}
                Some((_, bc)) if c == bc => tied = true,
                _ => {
                    best = Some((l, c));
                    tied = false;
                }
            }
        }
        for &j in nb {
            let l = labels.get(j);
            if l != NOISE {
                counts[l as usize] = 0;
            }
        }
        if let Some((l, c)) = best {
            if !tied && c as f64 / nb.len() as f64 >= theta {
                out[i] = l;
            }
        }
    }
    Labeling::new(out).expect("rescue keeps existing cluster ids")
}

/// Intermediate products of one AdaBox run.
#[derive(Debug, Clone)]
pub struct AdaBoxOutput {
    pub labels: Labeling,
    pub graph: KnnGraph,
    pub provisional: Labeling,
    pub dense_cell_count: usize,
    pub occupied_cell_count: usize,
}

/// Runs every stage after kNN construction on a prebuilt graph.
pub fn adabox_on_graph(graph: KnnGraph, cfg: &AdaBoxConfig) -> Result<AdaBoxOutput> {
    cfg.validate()?;
    if graph.k() != cfg.k_graph {
        return Err(Error::InvalidConfig(format!(
            "graph has k = {}, config asks for {}",
            graph.k(),
            cfg.k_graph
        )));
    }
    let union = symmetrize(&graph);
    let mutual = mutual_graph(&graph);
    let emb = spectral_embedding(&union, cfg.m)?;
    let grid = grid_assign(&emb, cfg.r);
    let dense = dense_cells(&grid.counts, cfg.tau_q, cfg.tau_abs);
    let clusters = merge_cells(&dense, &grid.cells, &mutual, cfg.e_min);
    let raw: Vec<i64> = grid
        .cells
        .iter()
        .map(|c| clusters.get(c).map_or(NOISE, |&id| id as i64))
        .collect();
    let provisional = Labeling::new(raw)?;
    let labels = noise_rescue(&provisional, &union, cfg.theta);
    Ok(AdaBoxOutput {
        labels,
        graph,
        provisional,
        dense_cell_count: dense.len(),
        occupied_cell_count: grid.counts.len(),
    })
}

/// Clusters `data`; returns the labeling and the kNN graph it was built on.
pub fn adabox_cluster(data: &Dataset, cfg: &AdaBoxConfig) -> Result<(Labeling, KnnGraph)> {
    cfg.validate()?;
    let graph = build_knn_graph(data, cfg.k_graph)?;
    let out = adabox_on_graph(graph, cfg)?;
    Ok((out.labels, out.graph))
}
