//! CVI model-selection and dimensionality-scaling experiments.

use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kmeans::kmeans;
use super::scenarios::{scaling_blobs, Scenario};
use crate::cvi::{calinski_harabasz, davies_bouldin, silhouette_with, CviKind, DistanceMatrix};
use crate::data::{Dataset, Labeling};
use crate::error::{Error, Result};
use crate::graph_scope::{graph_scope, GsWeights};
use crate::knn::{build_knn_graph, symmetrize, UndirectedGraph};
use crate::seed::{child_seed, rng_for};
use crate::supervised::{ari, kendall_tau_b, scope};

/// Name of the reference arm that always uses the true cluster count.
pub const ORACLE: &str = "oracle";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub dataset: String,
    pub cvi: String,
    pub chosen_k: usize,
    pub scope: f64,
    pub ari: f64,
    pub win: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionParams {
    pub trials: usize,
    pub k_range: (usize, usize),
    pub seed: u64,
    /// Neighbor count of the graph Graph-SCOPE and SCOPE read.
    pub graph_k: usize,
}

impl Default for SelectionParams {
    fn default() -> Self {
        Self {
            trials: 300,
            k_range: (2, 25),
            seed: 0,
            graph_k: 15,
        }
    }
}

/// One scored candidate partition.
#[derive(Debug, Clone)]
struct Candidate {
    k: usize,
    /// Oriented CVI scores in `CviKind::ALL` order; failures are `-inf`.
    cvi: [f64; 4],
    scope: f64,
    ari: f64,
}

struct Context<'a> {
    data: &'a Dataset,
    truth: &'a Labeling,
    graph: UndirectedGraph,
    dm: DistanceMatrix,
    weights: GsWeights,
}

impl<'a> Context<'a> {
    fn new(data: &'a Dataset, graph_k: usize) -> Result<Self> {
        let truth = data
            .truth()
            .ok_or_else(|| Error::InvalidConfig("benchmark datasets need truth labels".into()))?;
        let knn = build_knn_graph(data, graph_k.min(data.n().saturating_sub(1)))?;
        Ok(Self {
            data,
            truth,
            graph: symmetrize(&knn),
            dm: DistanceMatrix::new(data),
            weights: GsWeights::default(),
        })
    }

    fn score(&self, labels: &Labeling) -> Result<Candidate> {
        let raw = |kind: CviKind| -> Result<f64> {
            match kind {
                CviKind::GraphScope => Ok(graph_scope(&self.graph, labels, &self.weights)?.combined),
                CviKind::Silhouette => silhouette_with(&self.dm, labels),
                CviKind::DaviesBouldin => davies_bouldin(self.data, labels),
                CviKind::CalinskiHarabasz => calinski_harabasz(self.data, labels),
            }
        };
        let cvi = CviKind::ALL.map(|kind| match raw(kind) {
            Ok(v) if v.is_finite() => kind.oriented(v),
            _ => f64::NEG_INFINITY,
        });
        Ok(Candidate {
            k: labels.n_clusters(),
            cvi,
            scope: scope(labels, self.truth, &self.graph)?.combined,
            ari: ari(labels, self.truth)?,
        })
    }
}

/// Index of the largest value, lowest index on ties.
fn argmax(values: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Runs the selection experiment on each scenario. Per dataset, every CVI
/// picks its best K-Means trial; the oracle row takes the best SCOPE among
/// trials at the true k (running one extra fit when no trial drew it). Wins
/// are decided among the four CVIs; the oracle row never wins.
pub fn cvi_selection_experiment(scenarios: &[Scenario], params: &SelectionParams) -> Result<Vec<BenchRow>> {
    let (k_lo, k_hi) = params.k_range;
    if params.trials == 0 || k_lo < 2 || k_lo > k_hi {
        return Err(Error::InvalidConfig(format!("bad selection parameters {params:?}")));
    }
    let mut rows = Vec::with_capacity(scenarios.len() * (CviKind::ALL.len() + 1));
    for sc in scenarios {
        let ds_seed = child_seed(params.seed, sc.name, 0);
        let data = sc.generate(ds_seed)?;
        let ctx = Context::new(&data, params.graph_k)?;
        let k_max = k_hi.min(data.n());
        let draws: Vec<(usize, u64)> = (0..params.trials)
            .map(|t| {
                let mut rng = rng_for(child_seed(ds_seed, "trial", t as u64));
                (rng.random_range(k_lo..=k_max.max(k_lo)), rng.random())
            })
            .collect();
        let cands: Vec<Candidate> = draws
            .par_iter()
            .map(|&(k, s)| ctx.score(&kmeans(&data, k, s)?.labels))
            .collect::<Result<_>>()?;

        let mut picked: Vec<BenchRow> = CviKind::ALL
            .iter()
            .enumerate()
            .map(|(c, kind)| {
                let i = argmax(cands.iter().map(|x| x.cvi[c])).expect("trials >= 1");
                BenchRow {
                    dataset: sc.name.to_string(),
                    cvi: kind.name().to_string(),
                    chosen_k: cands[i].k,
                    scope: cands[i].scope,
                    ari: cands[i].ari,
                    win: false,
                }
            })
            .collect();
        let top = picked.iter().map(|r| r.scope).fold(f64::NEG_INFINITY, f64::max);
        for r in &mut picked {
            r.win = r.scope == top;
        }

        let k_true = sc.k_true();
        let oracle = match argmax(cands.iter().map(|x| if x.k == k_true { x.scope } else { f64::NEG_INFINITY })) {
            Some(i) if cands[i].k == k_true => cands[i].clone(),
            _ => ctx.score(&kmeans(&data, k_true, child_seed(ds_seed, ORACLE, 0))?.labels)?,
        };
        rows.extend(picked);
        rows.push(BenchRow {
            dataset: sc.name.to_string(),
            cvi: ORACLE.to_string(),
            chosen_k: oracle.k,
            scope: oracle.scope,
            ari: oracle.ari,
            win: false,
        });
    }
    Ok(rows)
}

/// Per-arm means over datasets and win counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub cvi: String,
    pub mean_scope: f64,
    pub mean_ari: f64,
    pub wins: usize,
    /// Wins shared with another CVI on the same dataset.
    pub tied_wins: usize,
    pub datasets: usize,
}

fn shared_win(rows: &[BenchRow], r: &BenchRow) -> bool {
    r.win && rows.iter().filter(|o| o.dataset == r.dataset && o.win).count() > 1
}

/// Aggregates in first-appearance order of the arm names.
pub fn aggregate(rows: &[BenchRow]) -> Vec<Aggregate> {
    let mut out: Vec<Aggregate> = Vec::new();
    for r in rows {
        let pos = match out.iter().position(|a| a.cvi == r.cvi) {
            Some(p) => p,
            None => {
                out.push(Aggregate {
                    cvi: r.cvi.clone(),
                    mean_scope: 0.0,
                    mean_ari: 0.0,
                    wins: 0,
                    tied_wins: 0,
                    datasets: 0,
                });
                out.len() - 1
            }
        };
        let a = &mut out[pos];
        a.mean_scope += r.scope;
        a.mean_ari += r.ari;
        a.wins += r.win as usize;
        a.tied_wins += shared_win(rows, r) as usize;
        a.datasets += 1;
    }
    for a in &mut out {
        a.mean_scope /= a.datasets as f64;
        a.mean_ari /= a.datasets as f64;
    }
    out
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::InvalidConfig(format!("{kind:?}")),
    }
}

/// Writes `dataset,cvi,chosen_k,scope,ari,win,tied` rows followed by one
/// aggregate row per arm with dataset `ALL`, mean SCOPE and ARI, empty
/// chosen_k, and the win and tied-win counts in the last two columns.
pub fn write_table1_csv(rows: &[BenchRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["dataset", "cvi", "chosen_k", "scope", "ari", "win", "tied"])?;
    for r in rows {
        w.write_record([
            r.dataset.clone(),
            r.cvi.clone(),
            r.chosen_k.to_string(),
            r.scope.to_string(),
            r.ari.to_string(),
            (r.win as u8).to_string(),
            (shared_win(rows, r) as u8).to_string(),
        ])?;
    }
    for a in aggregate(rows) {
        w.write_record([
            "ALL".to_string(),
            a.cvi,
            String::new(),
            a.mean_scope.to_string(),
            a.mean_ari.to_string(),
            a.wins.to_string(),
            a.tied_wins.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub d: usize,
    pub cvi: String,
    pub tau_vs_scope: f64,
    pub tau_vs_ari: f64,
}

/// Kendall tau-b of each CVI's ranking of K-Means partitions (one per k in
/// `k_range`) against the SCOPE and ARI rankings, per dimension. An
/// undefined tau (constant ranking) is reported as NaN.
pub fn scaling_experiment(
    dims: &[usize],
    n: usize,
    k_true: usize,
    k_range: (usize, usize),
    seed: u64,
) -> Result<Vec<ScalingRow>> {
    let (k_lo, k_hi) = k_range;
    if dims.is_empty() || k_lo < 2 || k_lo > k_hi || k_hi > n {
        return Err(Error::InvalidConfig(format!(
            "bad scaling parameters dims={dims:?} n={n} k_range={k_range:?}"
        )));
    }
    let mut rows = Vec::with_capacity(dims.len() * CviKind::ALL.len());
    for &d in dims {
        let ds_seed = child_seed(seed, "scaling", d as u64);
        let data = scaling_blobs(n, d, k_true, ds_seed)?;
        rows.extend(rank_agreement(&data, k_range, ds_seed)?);
    }
    Ok(rows)
}

/// Kendall tau-b of each CVI against SCOPE and ARI over one K-Means
/// partition per k in `k_range`, on a dataset with truth.
pub fn rank_agreement(data: &Dataset, k_range: (usize, usize), seed: u64) -> Result<Vec<ScalingRow>> {
    let ctx = Context::new(data, 15)?;
    let cands: Vec<Candidate> = (k_range.0..=k_range.1)
        .into_par_iter()
        .map(|k| ctx.score(&kmeans(data, k, child_seed(seed, "restart", k as u64))?.labels))
        .collect::<Result<_>>()?;
    let scope_v: Vec<f64> = cands.iter().map(|c| c.scope).collect();
    let ari_v: Vec<f64> = cands.iter().map(|c| c.ari).collect();
    Ok(CviKind::ALL
        .iter()
        .enumerate()
        .map(|(c, kind)| {
            let v: Vec<f64> = cands.iter().map(|x| x.cvi[c]).collect();
            let tau = |other: &[f64]| kendall_tau_b(&v, other).unwrap_or(f64::NAN);
            ScalingRow {
                d: data.d(),
                cvi: kind.name().to_string(),
                tau_vs_scope: tau(&scope_v),
                tau_vs_ari: tau(&ari_v),
            }
        })
        .collect())
}

pub fn write_scaling_csv(rows: &[ScalingRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["d", "cvi", "tau_vs_scope", "tau_vs_ari"])?;
    for r in rows {
        w.write_record([
            r.d.to_string(),
            r.cvi.clone(),
            r.tau_vs_scope.to_string(),
            r.tau_vs_ari.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
