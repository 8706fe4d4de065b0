//! JSON report written by `cluster` and `eval`.

use std::collections::BTreeMap;
use std::time::Instant;

use knnclust::cvi::{calinski_harabasz, davies_bouldin, silhouette, CviKind};
use knnclust::graph_scope::{graph_scope, GsReport, GsWeights};
use knnclust::knn::{build_knn_graph, symmetrize, UndirectedGraph};
use knnclust::slcd::SearchResult;
use knnclust::supervised::{ari, scope, ScopeReport};
use knnclust::{Dataset, Labeling};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DatasetDigest {
    pub n: usize,
    pub d: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Method {
    pub name: String,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalScore {
    pub name: CviKind,
    /// `null` when the index is undefined for this labeling.
    pub value: Option<f64>,
    pub higher_is_better: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub dataset: DatasetDigest,
    pub method: Method,
    pub c_clusters: usize,
    pub noise_fraction: f64,
    /// Neighbor count of the graph used by Graph-SCOPE and SCOPE.
    pub graph_k: usize,
    pub graph_scope: GsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scope: Option<ScopeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ari: Option<f64>,
    pub classical: Vec<ClassicalScore>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchResult>,
    /// Wall-clock seconds per stage; only with `--timings`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

/// Which metrics to compute beyond Graph-SCOPE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Metrics {
    pub supervised: bool,
    pub classical: bool,
}

/// Stage stopwatch; records nothing unless enabled.
pub struct Timer {
    laps: Option<BTreeMap<String, f64>>,
    last: Instant,
}

impl Timer {
    pub fn new(enabled: bool) -> Self {
        Self {
            laps: enabled.then(BTreeMap::new),
            last: Instant::now(),
        }
    }

    pub fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        if let Some(l) = &mut self.laps {
            l.insert(stage.to_string(), (now - self.last).as_secs_f64());
        }
        self.last = now;
    }

    pub fn finish(self) -> Option<BTreeMap<String, f64>> {
        self.laps
    }
}

fn classical(data: &Dataset, labels: &Labeling) -> Vec<ClassicalScore> {
    CviKind::ALL[1..]
        .iter()
        .map(|&kind| {
            let r = match kind {
                CviKind::Silhouette => silhouette(data, labels),
                CviKind::DaviesBouldin => davies_bouldin(data, labels),
                _ => calinski_harabasz(data, labels),
            };
            let (value, error) = match r {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e.to_string())),
            };
            ClassicalScore {
                name: kind,
                value,
                higher_is_better: kind.higher_is_better(),
                error,
            }
        })
        .collect()
}

pub fn union_graph(data: &Dataset, graph_k: usize) -> knnclust::Result<UndirectedGraph> {
    Ok(symmetrize(&build_knn_graph(data, graph_k)?))
}

/// Scores `labels` on `data`. Supervised fields need `truth`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    data: &Dataset,
    labels: &Labeling,
    truth: Option<&Labeling>,
    method: Method,
    graph_k: usize,
    metrics: Metrics,
    timer: &mut Timer,
) -> anyhow::Result<EvalReport> {
    let graph = union_graph(data, graph_k)?;
    timer.lap("eval-graph");
    let gs = graph_scope(&graph, labels, &GsWeights::default())?;
    let (scope_report, ari_value) = match (metrics.supervised, truth) {
        (true, Some(t)) => (Some(scope(labels, t, &graph)?), Some(ari(labels, t)?)),
        (true, None) => anyhow::bail!("supervised metrics need truth labels (pass --truth with a labeled input)"),
        (false, _) => (None, None),
    };
    let classical = if metrics.classical { classical(data, labels) } else { Vec::new() };
    timer.lap("eval-metrics");
    Ok(EvalReport {
        dataset: DatasetDigest { n: data.n(), d: data.d() },
        method,
        c_clusters: labels.n_clusters(),
        noise_fraction: labels.noise_fraction(),
        graph_k,
        graph_scope: gs,
        scope: scope_report,
        ari: ari_value,
        classical,
        search: None,
        timings: None,
    })
}
