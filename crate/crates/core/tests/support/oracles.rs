//! Reference implementations and input generators shared by the test suites.
#![allow(dead_code)]

use std::collections::BTreeMap;

use knnclust::bench::Layout;
use knnclust::data::canonicalize;
use knnclust::knn::{build_knn_graph, symmetrize};
use knnclust::{Dataset, Labeling, UndirectedGraph, NOISE};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// ARI from direct enumeration of all point pairs.
pub fn pair_count_ari(a: &[i64], b: &[i64]) -> f64 {
    let n = a.len();
    let (mut both, mut in_a, mut in_b) = (0u64, 0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            in_a += sa as u64;
            in_b += sb as u64;
            both += (sa && sb) as u64;
        }
    }
    let total = (n * (n - 1) / 2) as f64;
    let (index, sum_a, sum_b) = (both as f64, in_a as f64, in_b as f64);
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if max - expected == 0.0 {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

pub fn random_raw(rng: &mut ChaCha8Rng, n: usize) -> Vec<i64> {
    let c = rng.random_range(1..=5);
    (0..n).map(|_| rng.random_range(-1..c)).collect()
}

/// Tau-b from tie-group sizes: `S / sqrt((n0 - n1)(n0 - n2))`.
pub fn tau_b_by_groups(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let sign = |a: f64, b: f64| (a > b) as i64 - (a < b) as i64;
    let mut s = 0i64;
    for i in 0..n {
        for j in 0..n {
            if i < j {
                s += sign(x[i], x[j]) * sign(y[i], y[j]);
            }
        }
    }
    let tie_pairs = |v: &[f64]| {
        let mut groups: BTreeMap<u64, i64> = BTreeMap::new();
        for &t in v {
            *groups.entry(t.to_bits()).or_default() += 1;
        }
        groups.values().map(|&t| t * (t - 1) / 2).sum::<i64>()
    };
    let n0 = (n * (n - 1) / 2) as i64;
    let denom = (((n0 - tie_pairs(x)) * (n0 - tie_pairs(y))) as f64).sqrt();
    s as f64 / denom
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub struct Groups {
    pub members: Vec<Vec<Vec<f64>>>,
}

pub fn groups(data: &Dataset, labels: &Labeling) -> Groups {
    let mut members = vec![Vec::new(); labels.n_clusters()];
    for i in 0..data.n() {
        if labels.get(i) != NOISE {
            members[labels.get(i) as usize].push(data.row(i).to_vec());
        }
    }
    Groups { members }
}

pub fn mean(points: &[Vec<f64>]) -> Vec<f64> {
    let d = points[0].len();
    (0..d).map(|a| points.iter().map(|p| p[a]).sum::<f64>() / points.len() as f64).collect()
}

pub fn naive_silhouette(g: &Groups) -> f64 {
    let mut scores = Vec::new();
    for (ci, own) in g.members.iter().enumerate() {
        for (pi, p) in own.iter().enumerate() {
            if own.len() == 1 {
                scores.push(0.0);
                continue;
            }
            let a = own.iter().enumerate().filter(|(qi, _)| *qi != pi).map(|(_, q)| euclid(p, q)).sum::<f64>()
                / (own.len() - 1) as f64;
            let b = g
                .members
                .iter()
                .enumerate()
                .filter(|(cj, _)| *cj != ci)
                .map(|(_, other)| other.iter().map(|q| euclid(p, q)).sum::<f64>() / other.len() as f64)
                .fold(f64::INFINITY, f64::min);
            scores.push(if a.max(b) > 0.0 { (b - a) / a.max(b) } else { 0.0 });
        }
    }
    scores.iter().sum::<f64>() / scores.len() as f64
}

pub fn naive_davies_bouldin(g: &Groups) -> f64 {
    let cents: Vec<Vec<f64>> = g.members.iter().map(|m| mean(m)).collect();
    let scatter: Vec<f64> = g
        .members
        .iter()
        .zip(&cents)
        .map(|(m, c)| m.iter().map(|p| euclid(p, c)).sum::<f64>() / m.len() as f64)
        .collect();
    let k = cents.len();
    (0..k)
        .map(|i| {
            (0..k)
                .filter(|&j| j != i)
                .map(|j| (scatter[i] + scatter[j]) / euclid(&cents[i], &cents[j]))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum::<f64>()
        / k as f64
}

pub fn naive_calinski_harabasz(g: &Groups) -> f64 {
    let all: Vec<Vec<f64>> = g.members.iter().flatten().cloned().collect();
    let grand = mean(&all);
    let k = g.members.len() as f64;
    let n = all.len() as f64;
    let mut between = 0.0;
    let mut within = 0.0;
    for m in &g.members {
        let c = mean(m);
        between += m.len() as f64 * euclid(&c, &grand).powi(2);
        within += m.iter().map(|p| euclid(p, &c).powi(2)).sum::<f64>();
    }
    (between / (k - 1.0)) / (within / (n - k))
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

pub fn random_instance(rng: &mut ChaCha8Rng) -> (Dataset, Labeling) {
    loop {
        let n = rng.random_range(6..=40);
        let d = rng.random_range(1..=5);
        let c = rng.random_range(2..=4i64);
        let pts: Vec<f64> = (0..n * d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let with_noise = rng.random_bool(0.3);
        let raw: Vec<i64> = (0..n)
            .map(|_| if with_noise && rng.random_bool(0.15) { NOISE } else { rng.random_range(0..c) })
            .collect();
        let labels = canonicalize(&raw);
        let labeled = labels.len() - labels.noise_count();
        if labels.n_clusters() >= 2 && labeled > labels.n_clusters() {
            return (Dataset::new(pts, n, d, None).unwrap(), labels);
        }
    }
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> UndirectedGraph {
    let p = rng.random_range(0.05..0.6);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, 1));
    }
    UndirectedGraph::from_edges(n, &edges).unwrap()
}

pub fn random_labels(rng: &mut ChaCha8Rng, n: usize) -> Labeling {
    let c = rng.random_range(1..=5i64);
    let noise = rng.random_range(0.0..0.5);
    let raw: Vec<i64> = (0..n)
        .map(|_| if rng.random_bool(noise) { NOISE } else { rng.random_range(0..c) })
        .collect();
    canonicalize(&raw)
}

pub fn two_blob_graph(seed: u64) -> (UndirectedGraph, Labeling) {
    let data = Layout::blobs(2, 5, 8.0).generate(200, 5, seed).unwrap();
    let g = symmetrize(&build_knn_graph(&data, 10).unwrap());
    (g, data.truth().unwrap().clone())
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}
