//! Synthetic scenario registry.
//!
//! Every scenario is a Gaussian mixture described by a [`Layout`]. Cluster
//! centers live in the first `signal_dims` coordinates; the remaining
//! coordinates are unit white noise shared by all points. Centers can be
//! grouped: clusters of one group sit around a common group center, which
//! gives a two-level structure that centroid-ratio indices read as a handful
//! of large clusters.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{canonicalize, Dataset};
use crate::error::{Error, Result};
use crate::seed::{child_seed, rng_for};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    /// Number of true clusters.
    pub k: usize,
    /// Coordinates carrying cluster structure.
    pub signal_dims: usize,
    /// Expected distance between centers of one group.
    pub separation: f64,
    /// Number of center groups; 1 means no grouping.
    pub groups: usize,
    /// Expected distance between group centers.
    pub group_separation: f64,
    /// Cluster standard deviations run geometrically from `.0` to `.1`.
    pub spread: (f64, f64),
    /// Ratio of largest to smallest per-axis scale within a cluster.
    pub anisotropy: f64,
    /// Ratio of largest to smallest cluster size.
    pub imbalance: f64,
    /// Fraction of points drawn uniformly over the bounding box, labeled noise.
    pub noise_fraction: f64,
    /// Extra spread of each cluster along this many random unit directions
    /// of the signal space, with this standard deviation.
    pub latent: (usize, f64),
}

impl Layout {
    pub const fn blobs(k: usize, signal_dims: usize, separation: f64) -> Self {
        Self {
            k,
            signal_dims,
            separation,
            groups: 1,
            group_separation: 0.0,
            spread: (1.0, 1.0),
            anisotropy: 1.0,
            imbalance: 1.0,
            noise_fraction: 0.0,
            latent: (0, 0.0),
        }
    }

    pub fn generate(&self, n: usize, d: usize, seed: u64) -> Result<Dataset> {
        generate(n, d, self, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scenario {
    pub name: &'static str,
    pub n: usize,
    pub d: usize,
    pub layout: Layout,
}

impl Scenario {
    pub fn k_true(&self) -> usize {
        self.layout.k
    }

    pub fn generate(&self, seed: u64) -> Result<Dataset> {
        generate(self.n, self.d, &self.layout, seed)
    }
}

const N: usize = 2000;

/// The ten benchmark scenarios. Separations are in units of the base
/// cluster standard deviation.
pub const SCENARIOS: [Scenario; 10] = [
    Scenario {
        name: "easy-10d",
        n: N,
        d: 10,
        layout: Layout::blobs(5, 10, 12.0),
    },
    Scenario {
        name: "easy-50d",
        n: N,
        d: 50,
        layout: Layout::blobs(6, 50, 14.0),
    },
    Scenario {
        name: "many-50d",
        n: N,
        d: 50,
        layout: Layout::blobs(20, 50, 14.0),
    },
    Scenario {
        name: "imbalanced-50d",
        n: N,
        d: 50,
        layout: Layout {
            imbalance: 10.0,
            ..Layout::blobs(5, 50, 14.0)
        },
    },
    Scenario {
        name: "noisy-50d",
        n: N,
        d: 50,
        layout: Layout {
            noise_fraction: 0.15,
            ..Layout::blobs(5, 50, 14.0)
        },
    },
    Scenario {
        name: "aniso-50d",
        n: N,
        d: 50,
        layout: Layout {
            anisotropy: 8.0,
            ..Layout::blobs(5, 50, 16.0)
        },
    },
    Scenario {
        name: "mixed-density-30d",
        n: N,
        d: 30,
        layout: Layout {
            spread: (0.5, 2.0),
            ..Layout::blobs(5, 30, 16.0)
        },
    },
    Scenario {
        name: "planted-500d",
        n: N,
        d: 500,
        layout: Layout {
            groups: 2,
            group_separation: 40.0,
            ..Layout::blobs(8, 20, 20.0)
        },
    },
    Scenario {
        name: "tight-overlap-100d",
        n: N,
        d: 100,
        layout: Layout::blobs(6, 100, 9.0),
    },
    Scenario {
        name: "hard-100d",
        n: N,
        d: 100,
        layout: Layout {
            groups: 2,
            group_separation: 36.0,
            ..Layout::blobs(10, 100, 14.0)
        },
    },
];

pub fn scenario(name: &str) -> Result<&'static Scenario> {
    SCENARIOS
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

pub fn generate_scenario(name: &str, seed: u64) -> Result<Dataset> {
    scenario(name)?.generate(seed)
}

/// Blobs for the dimensionality sweep: `k_true` clusters in two groups, each
/// cluster spread along two random latent directions on top of unit
/// isotropic noise in all `d` coordinates. Lengths grow like `d^(1/4)`, which
/// keeps kNN neighborhoods stable while the isotropic part comes to dominate
/// total scatter as `d` grows.
pub fn scaling_blobs(n: usize, d: usize, k_true: usize, seed: u64) -> Result<Dataset> {
    let scale = (8.0 * d as f64).sqrt().sqrt();
    let layout = Layout {
        groups: 2.min(k_true),
        group_separation: 12.0 * scale,
        latent: (2.min(d), 2.0 * scale),
        ..Layout::blobs(k_true, d, 6.0 * scale)
    };
    generate(n, d, &layout, seed)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Random points whose expected pairwise distance is `delta`; a draw closer
/// than `0.7 * delta` to an earlier one is redrawn a bounded number of times.
fn spread_points(count: usize, dims: usize, delta: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let scale = delta / (2.0 * dims as f64).sqrt();
    let min_sq = (0.7 * delta).powi(2);
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut p = Vec::new();
        for _ in 0..200 {
            p = (0..dims).map(|_| scale * gaussian(rng)).collect();
            let ok = out
                .iter()
                .all(|q| q.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() >= min_sq);
            if ok {
                break;
            }
        }
        out.push(p);
    }
    out
}

/// Cluster sizes summing to `total` with weights falling geometrically from
/// 1 to `1 / imbalance`; largest-remainder rounding.
fn cluster_sizes(total: usize, k: usize, imbalance: f64) -> Vec<usize> {
    let w: Vec<f64> = (0..k)
        .map(|j| {
            if k == 1 {
                1.0
            } else {
                imbalance.powf(-(j as f64) / (k - 1) as f64)
            }
        })
        .collect();
    let sum: f64 = w.iter().sum();
    let exact: Vec<f64> = w.iter().map(|x| x / sum * total as f64).collect();
    let mut sizes: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let short = total - sizes.iter().sum::<usize>();
    for &j in order.iter().take(short) {
        sizes[j] += 1;
    }
    sizes
}

fn generate(n: usize, d: usize, layout: &Layout, seed: u64) -> Result<Dataset> {
    let lay = layout;
    if lay.k == 0 || lay.groups == 0 || lay.signal_dims == 0 || lay.signal_dims > d {
        return Err(Error::InvalidConfig(format!("bad layout {lay:?} for d = {d}")));
    }
    let n_noise = (lay.noise_fraction * n as f64).round() as usize;
    let n_clustered = n - n_noise;
    if n_clustered < lay.k {
        return Err(Error::InvalidConfig(format!("{n_clustered} points cannot fill {} clusters", lay.k)));
    }
    let s = lay.signal_dims;
    let mut rng = rng_for(child_seed(seed, "centers", 0));
    let group_centers = if lay.groups > 1 {
        spread_points(lay.groups, s, lay.group_separation, &mut rng)
    } else {
        vec![vec![0.0; s]]
    };
    let per_group: Vec<Vec<Vec<f64>>> = (0..lay.groups)
        .map(|g| {
            let members = (0..lay.k).filter(|j| j % lay.groups == g).count();
            spread_points(members, s, lay.separation, &mut rng)
        })
        .collect();
    let centers: Vec<Vec<f64>> = (0..lay.k)
        .map(|j| {
            let g = j % lay.groups;
            let off = &per_group[g][j / lay.groups];
            group_centers[g].iter().zip(off).map(|(a, b)| a + b).collect()
        })
        .collect();

    let sizes = cluster_sizes(n_clustered, lay.k, lay.imbalance);
    let half_log = lay.anisotropy.max(1.0).ln() / 2.0;
    let mut points = Vec::with_capacity(n * d);
    let mut truth = Vec::with_capacity(n);
    let mut rng = rng_for(child_seed(seed, "points", 0));
    for (j, &size) in sizes.iter().enumerate() {
        let sigma = if lay.k == 1 {
            lay.spread.0
        } else {
            lay.spread.0 * (lay.spread.1 / lay.spread.0).powf(j as f64 / (lay.k - 1) as f64)
        };
        let mut axes: Vec<f64> = (0..s)
            .map(|_| {
                if half_log > 0.0 {
                    rng.random_range(-half_log..=half_log).exp()
                } else {
                    1.0
                }
            })
            .collect();
        let rms = (axes.iter().map(|a| a * a).sum::<f64>() / s as f64).sqrt();
        axes.iter_mut().for_each(|a| *a /= rms);
        let dirs: Vec<Vec<f64>> = (0..lay.latent.0)
            .map(|_| {
                let v: Vec<f64> = (0..s).map(|_| gaussian(&mut rng)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.into_iter().map(|x| x / norm).collect()
            })
            .collect();
        let mut row = vec![0.0; s];
        for _ in 0..size {
            for t in 0..s {
                row[t] = centers[j][t] + sigma * axes[t] * gaussian(&mut rng);
            }
            for u in &dirs {
                let z = lay.latent.1 * gaussian(&mut rng);
                row.iter_mut().zip(u).for_each(|(r, x)| *r += z * x);
            }
            points.extend_from_slice(&row);
            for _ in s..d {
                points.push(gaussian(&mut rng));
            }
            truth.push(j as i64);
        }
    }
    if n_noise > 0 {
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for row in points.chunks_exact(d) {
            for (t, &v) in row.iter().enumerate() {
                lo[t] = lo[t].min(v);
                hi[t] = hi[t].max(v);
            }
        }
        for _ in 0..n_noise {
            for t in 0..d {
                points.push(if hi[t] > lo[t] { rng.random_range(lo[t]..hi[t]) } else { lo[t] });
            }
            truth.push(-1);
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(child_seed(seed, "shuffle", 0)));
    let mut shuffled = Vec::with_capacity(n * d);
    for &i in &order {
        shuffled.extend_from_slice(&points[i * d..(i + 1) * d]);
    }
    let raw: Vec<i64> = order.iter().map(|&i| truth[i]).collect();
    Dataset::new(shuffled, n, d, Some(canonicalize(&raw)))
}
