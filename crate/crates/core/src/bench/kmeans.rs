//! Lloyd's K-Means with k-means++ seeding.

use rand::Rng;

use crate::data::{canonicalize, sq_dist, Dataset, Labeling};
use crate::error::{Error, Result};
use crate::seed::rng_for;

pub const MAX_ITER: usize = 300;
pub const SHIFT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub labels: Labeling,
    /// Within-cluster sum of squares of the final partition.
    pub inertia: f64,
    /// Row-major `k x d` centroids, in the order of the canonical labels.
    pub centroids: Vec<f64>,
    /// Partition inertia after each iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
}

fn nearest(x: &[f64], centroids: &[f64], d: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.chunks_exact(d).enumerate() {
        let s = sq_dist(x, c);
        if s < best.1 {
            best = (j, s);
        }
    }
    best
}

/// Greedy k-means++: each step draws `2 + ln k` candidates by D^2 sampling
/// and keeps the one that lowers the potential most.
fn plus_plus(data: &Dataset, k: usize, seed: u64) -> Vec<f64> {
    let (n, d) = (data.n(), data.d());
    let mut rng = rng_for(seed);
    let tries = 2 + (k as f64).ln() as usize;
    let mut centroids = Vec::with_capacity(k * d);
    centroids.extend_from_slice(data.row(rng.random_range(0..n)));
    let mut d2: Vec<f64> = data.rows().map(|x| sq_dist(x, &centroids[..d])).collect();
    let mut scratch = vec![0.0; n];
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for _ in 0..tries {
            let pick = if total > 0.0 {
                let mut u = rng.random_range(0.0..total);
                let mut chosen = n - 1;
                for (i, &w) in d2.iter().enumerate() {
                    if u < w {
                        chosen = i;
                        break;
                    }
                    u -= w;
                }
                chosen
            } else {
                rng.random_range(0..n)
            };
            let c = data.row(pick);
            let mut pot = 0.0;
            for (i, x) in data.rows().enumerate() {
                scratch[i] = d2[i].min(sq_dist(x, c));
                pot += scratch[i];
            }
            if best.as_ref().is_none_or(|b| pot < b.0) {
                best = Some((pot, pick, scratch.clone()));
            }
        }
        let (_, pick, next) = best.expect("tries >= 2");
        d2 = next;
        centroids.extend_from_slice(data.row(pick));
    }
    centroids
}

/// Means of each cluster plus the partition's within-cluster sum of squares.
fn update(data: &Dataset, assign: &[usize], k: usize) -> (Vec<f64>, Vec<usize>, f64) {
    let d = data.d();
    let mut sums = vec![0.0; k * d];
    let mut sizes = vec![0usize; k];
    for (x, &j) in data.rows().zip(assign) {
        sizes[j] += 1;
        for (s, v) in sums[j * d..(j + 1) * d].iter_mut().zip(x) {
            *s += v;
        }
    }
    for j in 0..k {
        if sizes[j] > 0 {
            sums[j * d..(j + 1) * d].iter_mut().for_each(|s| *s /= sizes[j] as f64);
        }
    }
    let inertia = data
        .rows()
        .zip(assign)
        .map(|(x, &j)| sq_dist(x, &sums[j * d..(j + 1) * d]))
        .sum();
    (sums, sizes, inertia)
}

/// Moves the point farthest from its centroid into each empty cluster.
fn repair(data: &Dataset, assign: &mut [usize], centroids: &[f64], k: usize) {
    let d = data.d();
    let mut sizes = vec![0usize; k];
    for &j in assign.iter() {
        sizes[j] += 1;
    }
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let mut far = None;
        let mut far_d = -1.0;
        for (i, x) in data.rows().enumerate() {
            let j = assign[i];
            if sizes[j] < 2 {
                continue;
            }
            let s = sq_dist(x, &centroids[j * d..(j + 1) * d]);
            if s > far_d {
                far_d = s;
                far = Some(i);
            }
        }
        if let Some(i) = far {
            sizes[assign[i]] -= 1;
            assign[i] = empty;
            sizes[empty] = 1;
        }
    }
}

pub fn kmeans(data: &Dataset, k: usize, seed: u64) -> Result<KMeansFit> {
    let (n, d) = (data.n(), data.d());
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let mut centroids = plus_plus(data, k, seed);
    let mut assign = vec![0usize; n];
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        for (i, x) in data.rows().enumerate() {
            assign[i] = nearest(x, &centroids, d).0;
        }
        repair(data, &mut assign, &centroids, k);
        let (next, _, inertia) = update(data, &assign, k);
        trace.push(inertia);
        let shift = centroids
            .chunks_exact(d)
            .zip(next.chunks_exact(d))
            .map(|(a, b)| sq_dist(a, b))
            .fold(0.0, f64::max)
            .sqrt();
        centroids = next;
        if shift < SHIFT_TOL || iterations >= MAX_ITER {
            break;
        }
    }
    let inertia = *trace.last().expect("at least one iteration");
    let raw: Vec<i64> = assign.iter().map(|&j| j as i64).collect();
    let labels = canonicalize(&raw);
    let mut order = vec![usize::MAX; k];
    for (i, &j) in assign.iter().enumerate() {
        let c = labels.get(i) as usize;
        if order[c] == usize::MAX {
            order[c] = j;
        }
    }
    let centroids = order
        .iter()
        .flat_map(|&j| centroids[j * d..(j + 1) * d].iter().copied())
        .collect();
    Ok(KMeansFit {
        labels,
        inertia,
        centroids,
        trace,
        iterations,
    })
}
