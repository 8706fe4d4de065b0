//! Sample, search, deploy.
//!
//! A density-stratified sample is drawn from the full data, AdaBox
//! hyperparameters are tuned on it by random search against an unsupervised
//! (or, with truth, supervised) objective, and the winning sample labeling
//! is spread to every point by k-nearest-prototype voting.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adabox::{adabox_on_graph, AdaBoxConfig};
use crate::data::{compact, sq_dist, Dataset, Labeling, NOISE};
use crate::error::{Error, Result};
use crate::graph_scope::{graph_scope, GsWeights};
use crate::knn::{build_knn_graph, density_scores, symmetrize, KnnGraph};
use crate::seed::{child_seed, rng_for};
use crate::supervised::scope;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub n_s: usize,
    pub bins: usize,
    pub floor: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            n_s: 1000,
            bins: 10,
            floor: 1,
        }
    }
}

impl SampleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_s == 0 || self.bins == 0 || self.floor == 0 {
            return Err(Error::InvalidConfig(format!(
                "sample spec fields must be >= 1: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Quantile bin of each point: edges are nearest-rank quantiles at
/// `b / bins`, and a score equal to an edge falls in the lower bin.
pub fn density_bins(scores: &[f64], bins: usize) -> Vec<usize> {
    let n = scores.len();
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let edges: Vec<f64> = (1..bins)
        .map(|b| {
            let rank = ((b as f64 / bins as f64) * n as f64).ceil().max(1.0) as usize;
            sorted[rank.min(n) - 1]
        })
        .collect();
    scores
        .iter()
        .map(|s| edges.iter().filter(|&&e| e < *s).count())
        .collect()
}

/// Stratified sample over density bins. Each nonempty bin gets
/// `max(floor, round(n_s * share))` draws capped at its size; the total is
/// then brought to exactly `n_s`, trimming the largest allocations first
/// (never below the floor while any other bin can give) and topping up the
/// bins furthest below their proportional share. Returns sorted indices.
pub fn density_aware_sample(scores: &[f64], spec: &SampleSpec, seed: u64) -> Result<Vec<usize>> {
    spec.validate()?;
    let n = scores.len();
    if spec.n_s >= n {
        return Ok((0..n).collect());
    }
    let bin_of = density_bins(scores, spec.bins);
    let mut members = vec![Vec::new(); spec.bins];
    for (i, &b) in bin_of.iter().enumerate() {
        members[b].push(i);
    }
    let share = |b: usize| spec.n_s as f64 * members[b].len() as f64 / n as f64;
    let mut alloc: Vec<usize> = (0..spec.bins)
        .map(|b| {
            let size = members[b].len();
            if size == 0 {
                0
            } else {
                (share(b).round() as usize).max(spec.floor).min(size)
            }
        })
        .collect();

    let mut total: usize = alloc.iter().sum();
    while total > spec.n_s {
        let protected = |b: usize, a: &[usize]| a[b] <= spec.floor.min(members[b].len());
        let pick = (0..spec.bins)
            .filter(|&b| alloc[b] > 0 && !protected(b, &alloc))
            .max_by(|&a, &b| alloc[a].cmp(&alloc[b]).then(b.cmp(&a)))
            .or_else(|| {
                (0..spec.bins)
                    .filter(|&b| alloc[b] > 0)
                    .max_by(|&a, &b| alloc[a].cmp(&alloc[b]).then(b.cmp(&a)))
            })
            .expect("total > 0");
        alloc[pick] -= 1;
        total -= 1;
    }
    while total < spec.n_s {
        let pick = (0..spec.bins)
            .filter(|&b| alloc[b] < members[b].len())
            .max_by(|&a, &b| {
                (share(a) - alloc[a] as f64)
                    .total_cmp(&(share(b) - alloc[b] as f64))
                    .then(b.cmp(&a))
            })
            .expect("n_s < n leaves capacity");
        alloc[pick] += 1;
        total += 1;
    }

    let mut out = Vec::with_capacity(spec.n_s);
    for (b, pool) in members.iter().enumerate() {
        if alloc[b] == 0 {
            continue;
        }
        let mut rng = rng_for(child_seed(seed, "density-bin", b as u64));
        let mut picked: Vec<usize> = index::sample(&mut rng, pool.len(), alloc[b])
            .into_iter()
            .map(|k| pool[k])
            .collect();
        picked.sort_unstable();
        out.extend(picked);
    }
    out.sort_unstable();
    Ok(out)
}

/// Ranges sampled by the random search. Integer ranges are inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub k_graph: (usize, usize),
    pub m: (usize, usize),
    pub r: (usize, usize),
    pub tau_q: (f64, f64),
    pub tau_abs: Vec<usize>,
    pub e_min: Vec<usize>,
    pub theta: Vec<Option<f64>>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            k_graph: (5, 30),
            m: (2, 8),
            r: (4, 64),
            tau_q: (0.1, 0.9),
            tau_abs: vec![2, 3, 5],
            e_min: vec![0, 1, 2, 4],
            theta: vec![None, Some(0.5), Some(0.67), Some(0.8), Some(1.0)],
        }
    }
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        let ok = self.k_graph.0 >= 1
            && self.k_graph.0 <= self.k_graph.1
            && self.m.0 >= 1
            && self.m.0 <= self.m.1
            && self.r.0 >= 2
            && self.r.0 <= self.r.1
            && self.tau_q.0 <= self.tau_q.1
            && !self.tau_abs.is_empty()
            && !self.e_min.is_empty()
            && !self.theta.is_empty();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("bad search space {self:?}")))
        }
    }

    /// Draws one configuration uniformly from the space.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> AdaBoxConfig {
        AdaBoxConfig {
            k_graph: rng.random_range(self.k_graph.0..=self.k_graph.1),
            m: rng.random_range(self.m.0..=self.m.1),
            r: rng.random_range(self.r.0..=self.r.1),
            tau_q: if self.tau_q.0 == self.tau_q.1 {
                self.tau_q.0
            } else {
                rng.random_range(self.tau_q.0..self.tau_q.1)
            },
            tau_abs: self.tau_abs[rng.random_range(0..self.tau_abs.len())],
            e_min: self.e_min[rng.random_range(0..self.e_min.len())],
            theta: self.theta[rng.random_range(0..self.theta.len())],
        }
    }
}

/// What the search maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    #[default]
    GraphScope,
    /// Supervised SCOPE against the sample's truth.
    Scope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub config: AdaBoxConfig,
    pub seed: u64,
    pub objective: f64,
    pub c_clusters: usize,
    pub noise_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: TrialRecord,
    pub history: Vec<TrialRecord>,
    pub sample_indices: Vec<usize>,
}

/// Scores one configuration against a graph prebuilt with at least
/// `cfg.k_graph` neighbors.
fn evaluate(
    sample: &Dataset,
    full_graph: &KnnGraph,
    cfg: &AdaBoxConfig,
    objective: Objective,
    weights: &GsWeights,
) -> Result<(f64, Labeling)> {
    if cfg.k_graph > full_graph.k() {
        return Err(Error::KOutOfRange {
            k: cfg.k_graph,
            n: sample.n(),
        });
    }
    let out = adabox_on_graph(full_graph.truncate(cfg.k_graph)?, cfg)?;
    let union = symmetrize(&out.graph);
    let value = match objective {
        Objective::GraphScope => graph_scope(&union, &out.labels, weights)?.combined,
        Objective::Scope => {
            let truth = sample
                .truth()
                .ok_or_else(|| Error::InvalidConfig("SCOPE objective needs truth labels".into()))?;
            scope(&out.labels, truth, &union)?.combined
        }
    };
    Ok((value, out.labels))
}

/// Re-runs one trial record's configuration on `sample`.
pub fn replay(sample: &Dataset, cfg: &AdaBoxConfig, objective: Objective, weights: &GsWeights) -> Result<(f64, Labeling)> {
    let graph = build_knn_graph(sample, cfg.k_graph)?;
    evaluate(sample, &graph, cfg, objective, weights)
}

pub fn random_search(
    sample: &Dataset,
    space: &SearchSpace,
    trials: usize,
    seed: u64,
    objective: Objective,
    weights: &GsWeights,
) -> Result<SearchResult> {
    space.validate()?;
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be >= 1".into()));
    }
    let k_max = space.k_graph.1.min(sample.n().saturating_sub(1));
    let graph = if k_max >= 1 {
        Some(build_knn_graph(sample, k_max)?)
    } else {
        None
    };
    let history: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = child_seed(seed, "trial", t as u64);
            let config = space.draw(&mut rng_for(trial_seed));
            let result = match &graph {
                Some(g) => evaluate(sample, g, &config, objective, weights),
                None => Err(Error::TooFewPoints(sample.n())),
            };
            match result {
                Ok((objective, labels)) => TrialRecord {
                    index: t,
                    config,
                    seed: trial_seed,
                    objective,
                    c_clusters: labels.n_clusters(),
                    noise_fraction: labels.noise_fraction(),
                    error: None,
                },
                Err(e) => TrialRecord {
                    index: t,
                    config,
                    seed: trial_seed,
                    objective: 0.0,
                    c_clusters: 0,
                    noise_fraction: 1.0,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let best = history
        .iter()
        .filter(|r| r.error.is_none())
        .fold(None::<&TrialRecord>, |best, r| match best {
            Some(b) if b.objective >= r.objective => Some(b),
            _ => Some(r),
        })
        .ok_or(Error::AllTrialsFailed(trials))?
        .clone();
    Ok(SearchResult {
        best,
        history,
        sample_indices: (0..sample.n()).collect(),
    })
}

/// Labels every point of `full` by plurality vote of its `k_dep` nearest
/// prototypes. Noise votes count. Ties go to the label whose voters have the
/// smaller summed distance, then to the smaller label. A prototype voting
/// alone (`k_dep = 1`) keeps its own label.
pub fn deploy(full: &Dataset, prototypes: &[usize], proto_labels: &Labeling, k_dep: usize) -> Result<Labeling> {
    if prototypes.is_empty() {
        return Err(Error::EmptyPrototypes);
    }
    if proto_labels.len() != prototypes.len() {
        return Err(Error::LengthMismatch {
            left: prototypes.len(),
            right: proto_labels.len(),
        });
    }
    if k_dep == 0 || k_dep > prototypes.len() {
        return Err(Error::KOutOfRange {
            k: k_dep,
            n: prototypes.len(),
        });
    }
    if let Some(&bad) = prototypes.iter().find(|&&p| p >= full.n()) {
        return Err(Error::InvalidConfig(format!("prototype index {bad} out of range")));
    }
    let own: BTreeMap<usize, usize> = prototypes.iter().enumerate().map(|(pos, &p)| (p, pos)).collect();

    let labels: Vec<i64> = (0..full.n())
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(prototypes.len()),
            |cand: &mut Vec<(f64, usize)>, i| {
                if k_dep == 1 {
                    if let Some(&pos) = own.get(&i) {
                        return proto_labels.get(pos);
                    }
                }
                let xi = full.row(i);
                cand.clear();
                cand.extend(
                    prototypes
                        .iter()
                        .enumerate()
                        .map(|(pos, &p)| (sq_dist(xi, full.row(p)).sqrt(), pos)),
                );
                if k_dep < cand.len() {
                    cand.select_nth_unstable_by(k_dep - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                }
                let mut tally: BTreeMap<i64, (usize, f64)> = BTreeMap::new();
                let mut voters: Vec<(f64, usize)> = cand[..k_dep].to_vec();
                voters.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                for (d, pos) in voters {
                    let e = tally.entry(proto_labels.get(pos)).or_insert((0, 0.0));
                    e.0 += 1;
                    e.1 += d;
                }
                // BTreeMap iterates labels ascending, noise first
                let mut best = (NOISE, 0usize, f64::INFINITY);
                for (&l, &(c, s)) in &tally {
                    if c > best.1 || (c == best.1 && s < best.2) {
                        best = (l, c, s);
                    }
                }
                best.0
            },
        )
        .collect();
    Ok(compact(labels))
}

/// Full pipeline output.
#[derive(Debug, Clone)]
pub struct SlcdOutput {
    pub labels: Labeling,
    pub search: SearchResult,
    pub sample_labels: Labeling,
}

#[derive(Debug, Clone)]
pub struct SlcdParams {
    pub spec: SampleSpec,
    pub space: SearchSpace,
    pub trials: usize,
    pub k_dep: usize,
    pub seed: u64,
    pub objective: Objective,
    pub weights: GsWeights,
}

impl Default for SlcdParams {
    fn default() -> Self {
        Self {
            spec: SampleSpec::default(),
            space: SearchSpace::default(),
            trials: 300,
            k_dep: 5,
            seed: 0,
            objective: Objective::GraphScope,
            weights: GsWeights::default(),
        }
    }
}

pub fn slcd_run(full: &Dataset, params: &SlcdParams) -> Result<SlcdOutput> {
    params.space.validate()?;
    let k_density = params.space.k_graph.0.min(full.n().saturating_sub(1));
    let density_graph = build_knn_graph(full, k_density)?;
    let scores = density_scores(&density_graph);
    let sample_idx = density_aware_sample(&scores, &params.spec, child_seed(params.seed, "sample", 0))?;
    let sample = full.subset(&sample_idx)?;
    let mut search = random_search(
        &sample,
        &params.space,
        params.trials,
        child_seed(params.seed, "search", 0),
        params.objective,
        &params.weights,
    )?;
    search.sample_indices = sample_idx.clone();
    let (_, sample_labels) = replay(&sample, &search.best.config, params.objective, &params.weights)?;
    let labels = deploy(full, &sample_idx, &sample_labels, params.k_dep.min(sample_idx.len()))?;
    Ok(SlcdOutput {
        labels,
        search,
        sample_labels,
    })
}
