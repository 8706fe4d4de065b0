//! Geometry-based cluster validity indices.
//!
//! Noise points are dropped before scoring: they take part neither in the
//! averages nor in the distance pools.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{dist, sq_dist, Dataset, Labeling, NOISE};
use crate::error::{Error, Result};

/// The validity indices compared by the benchmark harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CviKind {
    GraphScope,
    Silhouette,
    DaviesBouldin,
    CalinskiHarabasz,
}

impl CviKind {
    pub const ALL: [CviKind; 4] = [
        CviKind::GraphScope,
        CviKind::Silhouette,
        CviKind::DaviesBouldin,
        CviKind::CalinskiHarabasz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CviKind::GraphScope => "graph-scope",
            CviKind::Silhouette => "silhouette",
            CviKind::DaviesBouldin => "davies-bouldin",
            CviKind::CalinskiHarabasz => "calinski-harabasz",
        }
    }

    pub fn higher_is_better(self) -> bool {
        !matches!(self, CviKind::DaviesBouldin)
    }

    /// Score oriented so that larger is always better.
    pub fn oriented(self, value: f64) -> f64 {
        if self.higher_is_better() {
            value
        } else {
            -value
        }
    }
}

impl fmt::Display for CviKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CviScore {
    pub name: CviKind,
    pub value: f64,
    pub higher_is_better: bool,
}

impl CviScore {
    pub fn new(name: CviKind, value: f64) -> Self {
        Self {
            name,
            value,
            higher_is_better: name.higher_is_better(),
        }
    }
}

/// Full symmetric Euclidean distance matrix, for repeated silhouette
/// evaluations on one dataset.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(data: &Dataset) -> Self {
        let n = data.n();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let xi = data.row(i);
                (0..n).map(|j| dist(xi, data.row(j))).collect()
            })
            .collect();
        Self {
            n,
            values: rows.concat(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

fn check(data_n: usize, labels: &Labeling) -> Result<()> {
    if data_n != labels.len() {
        return Err(Error::LengthMismatch {
            left: data_n,
            right: labels.len(),
        });
    }
    if labels.n_clusters() < 2 {
        return Err(Error::InsufficientClusters(labels.n_clusters()));
    }
    Ok(())
}

fn silhouette_core<F>(labels: &Labeling, row_dist: F) -> f64
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let n = labels.len();
    let c = labels.n_clusters();
    let sizes = labels.cluster_sizes();
    let per_point: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; c]),
            |(drow, sums), i| {
                let li = labels.get(i);
                if li == NOISE {
                    return None;
                }
                let own = li as usize;
                if sizes[own] == 1 {
                    return Some(0.0);
                }
                row_dist(i, drow);
                sums.iter_mut().for_each(|s| *s = 0.0);
                for (j, &dj) in drow.iter().enumerate() {
                    let lj = labels.get(j);
                    if lj != NOISE {
                        sums[lj as usize] += dj;
                    }
                }
                let a = sums[own] / (sizes[own] - 1) as f64;
                let b = (0..c)
                    .filter(|&k| k != own)
                    .map(|k| sums[k] / sizes[k] as f64)
                    .fold(f64::INFINITY, f64::min);
                let denom = a.max(b);
                Some(if denom > 0.0 { (b - a) / denom } else { 0.0 })
            },
        )
        .collect();
    let (sum, count) = per_point
        .into_iter()
        .flatten()
        .fold((0.0, 0usize), |(s, k), v| (s + v, k + 1));
    sum / count as f64
}

/// Mean silhouette over non-noise points; singleton clusters score 0.
pub fn silhouette(data: &Dataset, labels: &Labeling) -> Result<f64> {
    check(data.n(), labels)?;
    Ok(silhouette_core(labels, |i, out| {
        let xi = data.row(i);
        for (j, o) in out.iter_mut().enumerate() {
            *o = dist(xi, data.row(j));
        }
    }))
}

/// [`silhouette`] over a precomputed distance matrix.
pub fn silhouette_with(dm: &DistanceMatrix, labels: &Labeling) -> Result<f64> {
    check(dm.n(), labels)?;
    Ok(silhouette_core(labels, |i, out| out.copy_from_slice(dm.row(i))))
}

/// Per-cluster centroids and sizes over non-noise points.
fn centroids(data: &Dataset, labels: &Labeling) -> (Vec<Vec<f64>>, Vec<usize>) {
    let c = labels.n_clusters();
    let d = data.d();
    let mut cent = vec![vec![0.0; d]; c];
    let mut sizes = vec![0usize; c];
    for (i, row) in data.rows().enumerate() {
        let l = labels.get(i);
        if l == NOISE {
            continue;
        }
        sizes[l as usize] += 1;
        for (a, v) in cent[l as usize].iter_mut().zip(row) {
            *a += v;
        }
    }
    for (cv, &s) in cent.iter_mut().zip(&sizes) {
        cv.iter_mut().for_each(|v| *v /= s as f64);
    }
    (cent, sizes)
}

/// Mean over clusters of the worst `(S_i + S_j) / M_ij`.
pub fn davies_bouldin(data: &Dataset, labels: &Labeling) -> Result<f64> {
    check(data.n(), labels)?;
    let c = labels.n_clusters();
    let (cent, sizes) = centroids(data, labels);
    let mut scatter = vec![0.0; c];
    for (i, row) in data.rows().enumerate() {
        let l = labels.get(i);
        if l != NOISE {
            scatter[l as usize] += dist(row, &cent[l as usize]);
        }
    }
    for (s, &n) in scatter.iter_mut().zip(&sizes) {
        *s /= n as f64;
    }
    let mut sep = vec![vec![0.0; c]; c];
    for i in 0..c {
        for j in i + 1..c {
            let m = dist(&cent[i], &cent[j]);
            if m == 0.0 {
                return Err(Error::DegenerateCentroids(i, j));
            }
            sep[i][j] = m;
            sep[j][i] = m;
        }
    }
    let total: f64 = (0..c)
        .map(|i| {
            (0..c)
                .filter(|&j| j != i)
                .map(|j| (scatter[i] + scatter[j]) / sep[i][j])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum();
    Ok(total / c as f64)
}

/// `(B / (C - 1)) / (W / (n - C))` over non-noise points.
pub fn calinski_harabasz(data: &Dataset, labels: &Labeling) -> Result<f64> {
    check(data.n(), labels)?;
    let c = labels.n_clusters();
    let (cent, sizes) = centroids(data, labels);
    let n_eff: usize = sizes.iter().sum();
    let mut grand = vec![0.0; data.d()];
    for (cv, &s) in cent.iter().zip(&sizes) {
        for (g, v) in grand.iter_mut().zip(cv) {
            *g += v * s as f64;
        }
    }
    grand.iter_mut().for_each(|g| *g /= n_eff as f64);
    let between: f64 = cent
        .iter()
        .zip(&sizes)
        .map(|(cv, &s)| s as f64 * sq_dist(cv, &grand))
        .sum();
    let within: f64 = data
        .rows()
        .enumerate()
        .filter(|(i, _)| !labels.is_noise(*i))
        .map(|(i, row)| sq_dist(row, &cent[labels.get(i) as usize]))
        .sum();
    if within == 0.0 || n_eff <= c {
        return Err(Error::ZeroWithinScatter);
    }
    Ok((between / (c - 1) as f64) / (within / (n_eff - c) as f64))
}
