//! Graph-SCOPE: a cluster validity index computed only from graph topology.
//!
//! Five components, each in `[0, 1]`, are combined by a weighted arithmetic
//! mean:
//!
//! | component          | reads                                                  |
//! |--------------------|--------------------------------------------------------|
//! | modularity         | Newman-Girvan Q, noise points as singleton communities |
//! | boundary sharpness | mean same-label share of each node's labeled neighbors |
//! | consistency        | macro share of nodes whose neighbor plurality is home  |
//! | noise legitimacy   | how detached each noise point is from every cluster    |
//! | balance            | normalized entropy of cluster sizes                    |
//!
//! Each evaluation is `O(n k)` on a symmetrized kNN graph. Edges are
//! unweighted: no distances enter after graph construction.

use serde::{Deserialize, Serialize};

use crate::data::{Labeling, NOISE};
use crate::error::{Error, Result};
use crate::knn::UndirectedGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GsWeights {
    pub w_mod: f64,
    pub w_sharp: f64,
    pub w_cons: f64,
    pub w_noise: f64,
    pub w_bal: f64,
}

impl GsWeights {
    /// Normalizes to unit sum. Weights must be finite, non-negative and
    /// not all zero.
    pub fn new(w_mod: f64, w_sharp: f64, w_cons: f64, w_noise: f64, w_bal: f64) -> Result<Self> {
        let w = [w_mod, w_sharp, w_cons, w_noise, w_bal];
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidConfig(format!("weights must be non-negative: {w:?}")));
        }
        let s: f64 = w.iter().sum();
        if s <= 0.0 {
            return Err(Error::InvalidConfig("weights sum to zero".into()));
        }
        Ok(Self {
            w_mod: w_mod / s,
            w_sharp: w_sharp / s,
            w_cons: w_cons / s,
            w_noise: w_noise / s,
            w_bal: w_bal / s,
        })
    }

    fn as_array(&self) -> [f64; 5] {
        [self.w_mod, self.w_sharp, self.w_cons, self.w_noise, self.w_bal]
    }
}

impl Default for GsWeights {
    fn default() -> Self {
        Self {
            w_mod: 0.40,
            w_sharp: 0.15,
            w_cons: 0.15,
            w_noise: 0.15,
            w_bal: 0.15,
        }
    }
}

/// A component value that may have been computed on an empty support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub value: f64,
    pub degenerate: bool,
}

impl Component {
    fn ok(value: f64) -> Self {
        Self {
            value,
            degenerate: false,
        }
    }

    fn degenerate() -> Self {
        Self {
            value: 0.0,
            degenerate: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsReport {
    pub modularity_q: f64,
    pub modularity01: f64,
    pub sharpness: f64,
    pub consistency: f64,
    pub noise_legitimacy: f64,
    pub balance: f64,
    pub combined: f64,
    pub weights: GsWeights,
    pub c_clusters: usize,
    pub noise_fraction: f64,
}

impl GsReport {
    pub fn components(&self) -> [f64; 5] {
        [
            self.modularity01,
            self.sharpness,
            self.consistency,
            self.noise_legitimacy,
            self.balance,
        ]
    }
}

fn check_len(g: &UndirectedGraph, labels: &Labeling) -> Result<()> {
    if g.n() != labels.len() {
        return Err(Error::LengthMismatch {
            left: g.n(),
            right: labels.len(),
        });
    }
    Ok(())
}

/// Sums per-cluster terms in ascending order so renaming clusters cannot
/// change the rounding.
fn sorted_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = terms.collect();
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

/// Newman-Girvan modularity, `Q = sum_c (e_cc / m - (d_c / 2m)^2)`.
/// Every noise point is its own community.
pub fn modularity(g: &UndirectedGraph, labels: &Labeling) -> Result<f64> {
    check_len(g, labels)?;
    if g.m() == 0 {
        return Err(Error::DegenerateGraph);
    }
    let two_m = 2.0 * g.m() as f64;
    let mut intra = 0usize;
    let mut deg_sum = vec![0usize; labels.n_clusters()];
    let mut singleton_term = 0.0;
    for i in 0..g.n() {
        let li = labels.get(i);
        let deg = g.degree(i);
        if li == NOISE {
            let f = deg as f64 / two_m;
            singleton_term += f * f;
            continue;
        }
        deg_sum[li as usize] += deg;
        intra += g.neighbors(i).iter().filter(|&&j| labels.get(j) == li).count();
    }
    // `intra` counts each internal edge from both endpoints.
    let e_in = intra as f64 / two_m;
    let expected = sorted_sum(deg_sum.iter().map(|&d| {
        let f = d as f64 / two_m;
        f * f
    }));
    Ok(e_in - expected - singleton_term)
}

/// Mean, over non-noise nodes with at least one non-noise neighbor, of the
/// share of those neighbors carrying the node's own label.
pub fn boundary_sharpness(g: &UndirectedGraph, labels: &Labeling) -> Result<Component> {
    check_len(g, labels)?;
    let mut total = 0.0;
    let mut eligible = 0usize;
    for i in 0..g.n() {
        let li = labels.get(i);
        if li == NOISE {
            continue;
        }
        let (mut same, mut labeled) = (0usize, 0usize);
        for &j in g.neighbors(i) {
            let lj = labels.get(j);
            if lj != NOISE {
                labeled += 1;
                same += usize::from(lj == li);
            }
        }
        if labeled > 0 {
            total += same as f64 / labeled as f64;
            eligible += 1;
        }
    }
    Ok(if eligible == 0 {
        Component::degenerate()
    } else {
        Component::ok(total / eligible as f64)
    })
}

/// Plurality label among the non-noise neighbors of `i`; `None` when there
/// are none or the plurality is tied.
fn neighbor_plurality(g: &UndirectedGraph, labels: &Labeling, i: usize, counts: &mut [usize]) -> Option<i64> {
    let nb = g.neighbors(i);
    for &j in nb {
        let l = labels.get(j);
        if l != NOISE {
            counts[l as usize] += 1;
        }
    }
    let mut best: Option<i64> = None;
    let mut best_count = 0;
    let mut tied = false;
    for &j in nb {
        let l = labels.get(j);
        if l == NOISE {
            continue;
        }
        let c = counts[l as usize];
        if c > best_count {
            best_count = c;
            best = Some(l);
            tied = false;
        } else if c == best_count && best != Some(l) {
            tied = true;
        }
    }
    for &j in nb {
        let l = labels.get(j);
        if l != NOISE {
            counts[l as usize] = 0;
        }
    }
    if tied {
        None
    } else {
        best
    }
}

/// Macro average over clusters of the share of members whose neighbor
/// plurality is their own cluster. Ties and isolated nodes count as misses.
pub fn internal_consistency(g: &UndirectedGraph, labels: &Labeling) -> Result<Component> {
    check_len(g, labels)?;
    let c = labels.n_clusters();
    if c == 0 {
        return Ok(Component::degenerate());
    }
    let mut hits = vec![0usize; c];
    let mut sizes = vec![0usize; c];
    let mut scratch = vec![0usize; c];
    for i in 0..g.n() {
        let li = labels.get(i);
        if li == NOISE {
            continue;
        }
        sizes[li as usize] += 1;
        if neighbor_plurality(g, labels, i, &mut scratch) == Some(li) {
            hits[li as usize] += 1;
        }
    }
    let macro_avg = sorted_sum(hits.iter().zip(&sizes).map(|(&h, &s)| h as f64 / s as f64)) / c as f64;
    Ok(Component::ok(macro_avg))
}

/// `1` without noise; otherwise the mean over noise points of
/// `1 - max_c share_c`, where `share_c` is the fraction of the point's
/// neighbors in cluster `c`. Isolated noise points count as fully legitimate.
pub fn noise_legitimacy(g: &UndirectedGraph, labels: &Labeling) -> Result<f64> {
    check_len(g, labels)?;
    let mut scratch = vec![0usize; labels.n_clusters()];
    let mut total = 0.0;
    let mut noise = 0usize;
    for i in 0..g.n() {
        if labels.get(i) != NOISE {
            continue;
        }
        noise += 1;
        let nb = g.neighbors(i);
        if nb.is_empty() {
            total += 1.0;
            continue;
        }
        let mut max = 0;
        for &j in nb {
            let l = labels.get(j);
            if l != NOISE {
                scratch[l as usize] += 1;
                max = max.max(scratch[l as usize]);
            }
        }
        for &j in nb {
            let l = labels.get(j);
            if l != NOISE {
                scratch[l as usize] = 0;
            }
        }
        total += 1.0 - max as f64 / nb.len() as f64;
    }
    Ok(if noise == 0 { 1.0 } else { total / noise as f64 })
}

/// Shannon entropy of non-noise cluster proportions over `ln C`; `0` for
/// `C <= 1`.
pub fn partition_balance(labels: &Labeling) -> f64 {
    let c = labels.n_clusters();
    if c < 2 {
        return 0.0;
    }
    let sizes = labels.cluster_sizes();
    let total: usize = sizes.iter().sum();
    let h = sorted_sum(sizes.iter().filter(|&&s| s > 0).map(|&s| {
        let p = s as f64 / total as f64;
        -p * p.ln()
    }));
    (h / (c as f64).ln()).clamp(0.0, 1.0)
}

/// All five components and their weighted mean.
pub fn graph_scope(g: &UndirectedGraph, labels: &Labeling, w: &GsWeights) -> Result<GsReport> {
    let q = modularity(g, labels)?;
    let modularity01 = ((q + 0.5) / 1.5).clamp(0.0, 1.0);
    let sharpness = boundary_sharpness(g, labels)?.value;
    let consistency = internal_consistency(g, labels)?.value;
    let noise_leg = noise_legitimacy(g, labels)?;
    let balance = partition_balance(labels);
    let comps = [modularity01, sharpness, consistency, noise_leg, balance];
    let combined = w
        .as_array()
        .iter()
        .zip(comps)
        .map(|(wi, ci)| wi * ci)
        .sum::<f64>()
        .clamp(0.0, 1.0);
    Ok(GsReport {
        modularity_q: q,
        modularity01,
        sharpness,
        consistency,
        noise_legitimacy: noise_leg,
        balance,
        combined,
        weights: *w,
        c_clusters: labels.n_clusters(),
        noise_fraction: labels.noise_fraction(),
    })
}
