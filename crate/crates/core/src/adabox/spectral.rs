//! Spectral embedding from the symmetric normalized Laplacian
//! `L = I - D^{-1/2} A D^{-1/2}`.
//!
//! The smallest eigenpairs of `L` are the largest of `M = 2I - L`, whose
//! spectrum lies in `[0, 2]`. We run block orthogonal iteration on `M` with
//! a Rayleigh-Ritz step per sweep, deflating the trivial vector
//! `D^{1/2} 1`. The block carries extra columns beyond `m` so that the
//! convergence rate is governed by the gap after the block, not inside it.

use crate::error::{Error, Result};
use crate::knn::UndirectedGraph;
use crate::seed::splitmix64;

pub const RESIDUAL_TOL: f64 = 1e-6;
pub const MAX_SWEEPS: usize = 500;

const INIT_SEED: u64 = 0x5EED_0F_A11CE;

/// Graph-spectral coordinates: `n x m`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    n: usize,
    m: usize,
    coords: Vec<f64>,
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
    sweeps: usize,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.m..(i + 1) * self.m]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.coords[i * self.m + c]).collect()
    }

    /// Laplacian eigenvalues, ascending, one per column.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `||L v - lambda v||` per column at exit.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// Builds an embedding from raw coordinates (tests and grid experiments).
    pub fn from_coords(n: usize, m: usize, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != n * m || m == 0 {
            return Err(Error::InvalidConfig(format!(
                "{} coordinates for shape {n}x{m}",
                coords.len()
            )));
        }
        Ok(Self {
            n,
            m,
            coords,
            eigenvalues: vec![f64::NAN; m],
            residuals: vec![f64::NAN; m],
            sweeps: 0,
        })
    }
}

struct Operator<'a> {
    g: &'a UndirectedGraph,
    inv_sqrt_deg: Vec<f64>,
}

impl Operator<'_> {
    /// `y = (I + D^{-1/2} A D^{-1/2}) x`
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let si = self.inv_sqrt_deg[i];
            let mut acc = 0.0;
            for &j in self.g.neighbors(i) {
                acc += x[j] * self.inv_sqrt_deg[j];
            }
            *yi = x[i] + si * acc;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn pseudo_random_column(n: usize, tag: u64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let h = splitmix64(INIT_SEED ^ splitmix64(tag.wrapping_mul(0x1000_0000_01) ^ i as u64));
            (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
        .collect()
}

/// Orthonormalizes `cols` in place against `u0` and each other (two passes
/// of modified Gram-Schmidt). Columns that vanish are refilled from the
/// deterministic generator.
fn orthonormalize(cols: &mut [Vec<f64>], u0: &[f64], refill: &mut u64) {
    let n = u0.len();
    for c in 0..cols.len() {
        let mut attempts = 0;
        loop {
            let before = dot(&cols[c], &cols[c]).sqrt();
            for _ in 0..2 {
                let p = dot(&cols[c], u0);
                axpy(-p, u0, &mut cols[c]);
                for prev in 0..c {
                    let (done, rest) = cols.split_at_mut(c);
                    let p = dot(&rest[0], &done[prev]);
                    axpy(-p, &done[prev], &mut rest[0]);
                }
            }
            let norm = dot(&cols[c], &cols[c]).sqrt();
            if norm > 1e-10 * before.max(1e-300) && norm > 1e-300 {
                cols[c].iter_mut().for_each(|v| *v /= norm);
                break;
            }
            attempts += 1;
            assert!(attempts < 64, "cannot extend orthonormal basis");
            *refill += 1;
            cols[c] = pseudo_random_column(n, *refill);
        }
    }
}

/// Cyclic Jacobi eigendecomposition of a small symmetric matrix.
/// Returns eigenvalues and column eigenvectors (`vecs[row][col]`).
pub(crate) fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let b = a.len();
    let mut v = vec![vec![0.0; b]; b];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for _ in 0..100 {
        let off: f64 = (0..b)
            .flat_map(|p| (0..b).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..b {
            for q in p + 1..b {
                let apq = a[p][q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..b {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..b {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..b).map(|i| a[i][i]).collect(), v)
}

/// Block size used for `m` requested columns on `n` nodes.
fn block_size(n: usize, m: usize) -> usize {
    (2 * m + 8).min(n - 1)
}

/// The `m` eigenvectors of the normalized Laplacian with the smallest
/// eigenvalues after the trivial `D^{1/2} 1` direction. Each column is
/// unit-norm, and its largest-magnitude entry is positive.
pub fn spectral_embedding(g: &UndirectedGraph, m: usize) -> Result<Embedding> {
    let n = g.n();
    if m == 0 || n < 2 || m > n - 1 {
        return Err(Error::InvalidConfig(format!(
            "embedding dimension {m} out of range for {n} nodes"
        )));
    }
    let degrees = g.degrees();
    let inv_sqrt_deg: Vec<f64> = degrees
        .iter()
        .map(|&d| if d == 0 { 0.0 } else { 1.0 / (d as f64).sqrt() })
        .collect();
    let op = Operator { g, inv_sqrt_deg };

    let mut u0: Vec<f64> = degrees.iter().map(|&d| (d as f64).sqrt()).collect();
    let norm0 = dot(&u0, &u0).sqrt();
    if norm0 == 0.0 {
        u0 = vec![1.0 / (n as f64).sqrt(); n];
    } else {
        u0.iter_mut().for_each(|v| *v /= norm0);
    }

    let b = block_size(n, m);
    let mut refill = b as u64;
    let mut x: Vec<Vec<f64>> = (0..b).map(|c| pseudo_random_column(n, c as u64)).collect();
    orthonormalize(&mut x, &u0, &mut refill);
    let mut mx: Vec<Vec<f64>> = x
        .iter()
        .map(|col| {
            let mut y = vec![0.0; n];
            op.apply(col, &mut y);
            y
        })
        .collect();

    let mut mu = vec![0.0; b];
    let mut residuals = vec![f64::INFINITY; m];
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut q = std::mem::take(&mut mx);
        orthonormalize(&mut q, &u0, &mut refill);
        let mq: Vec<Vec<f64>> = q
            .iter()
            .map(|col| {
                let mut y = vec![0.0; n];
                op.apply(col, &mut y);
                y
            })
            .collect();
        let mut h = vec![vec![0.0; b]; b];
        for r in 0..b {
            for c in r..b {
                let v = 0.5 * (dot(&q[r], &mq[c]) + dot(&q[c], &mq[r]));
                h[r][c] = v;
                h[c][r] = v;
            }
        }
        let (vals, vecs) = jacobi_eigen(h);
        let mut order: Vec<usize> = (0..b).collect();
        order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));

        x = order
            .iter()
            .map(|&c| {
                let mut col = vec![0.0; n];
                for (r, qr) in q.iter().enumerate() {
                    axpy(vecs[r][c], qr, &mut col);
                }
                col
            })
            .collect();
        mx = order
            .iter()
            .map(|&c| {
                let mut col = vec![0.0; n];
                for (r, mqr) in mq.iter().enumerate() {
                    axpy(vecs[r][c], mqr, &mut col);
                }
                col
            })
            .collect();
        mu = order.iter().map(|&c| vals[c]).collect();

        for j in 0..m {
            let r: f64 = mx[j]
                .iter()
                .zip(&x[j])
                .map(|(a, v)| {
                    let t = a - mu[j] * v;
                    t * t
                })
                .sum::<f64>()
                .sqrt();
            residuals[j] = r;
        }
        if residuals.iter().all(|&r| r < RESIDUAL_TOL) {
            break;
        }
    }
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if worst >= RESIDUAL_TOL {
        return Err(Error::EigenNoConvergence {
            sweeps,
            residual: worst,
        });
    }

    let mut coords = vec![0.0; n * m];
    for (c, col) in x.iter().take(m).enumerate() {
        let mut pivot = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (i, v) in col.iter().enumerate() {
            coords[i * m + c] = sign * v;
        }
    }
    Ok(Embedding {
        n,
        m,
        coords,
        eigenvalues: mu.iter().take(m).map(|v| 2.0 - v).collect(),
        residuals,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalizes() {
        let a = vec![vec![2.0, 1.0, 0.0], vec![1.0, 2.0, 1.0], vec![0.0, 1.0, 2.0]];
        let (mut vals, _) = jacobi_eigen(a);
        vals.sort_by(f64::total_cmp);
        let s2 = 2f64.sqrt();
        for (v, e) in vals.iter().zip([2.0 - s2, 2.0, 2.0 + s2]) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_dimension() {
        let g = UndirectedGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(spectral_embedding(&g, 0).is_err());
        assert!(spectral_embedding(&g, 3).is_err());
    }

    #[test]
    fn two_cliques_split_by_sign() {
        let mut edges = Vec::new();
        for base in [0, 5] {
            for i in 0..5 {
                for j in i + 1..5 {
                    edges.push((base + i, base + j));
                }
            }
        }
        let g = UndirectedGraph::from_edges(10, &edges).unwrap();
        let e = spectral_embedding(&g, 1).unwrap();
        let col = e.column(0);
        assert!(col[..5].iter().all(|&v| v > 0.0) || col[..5].iter().all(|&v| v < 0.0));
        assert!(col[..5].iter().all(|&v| v * col[5] < 0.0));
        assert!(e.eigenvalues()[0].abs() < 1e-9);
    }
}
