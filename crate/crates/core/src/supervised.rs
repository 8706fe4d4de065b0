//! Ground-truth referenced scores: ARI, Kendall tau-b and SCOPE.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::data::{Labeling, NOISE};
use crate::error::{Error, Result};
use crate::knn::UndirectedGraph;

fn pairs(c: u64) -> f64 {
    (c * c.saturating_sub(1) / 2) as f64
}

/// Adjusted Rand index from the contingency table. Noise is an ordinary
/// extra category here.
pub fn ari(a: &Labeling, b: &Labeling) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len() as u64;
    if n < 2 {
        return Ok(1.0);
    }
    let mut cells: HashMap<(i64, i64), u64> = HashMap::new();
    let mut rows: HashMap<i64, u64> = HashMap::new();
    let mut cols: HashMap<i64, u64> = HashMap::new();
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        *cells.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = cells.values().map(|&c| pairs(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| pairs(c)).sum();
    let expected = sum_a * sum_b / pairs(n);
    let max = 0.5 * (sum_a + sum_b);
    let denom = max - expected;
    if denom == 0.0 {
        // Both partitions trivial in the same way (one block or all singletons).
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

/// Kendall tau-b with tie correction, by direct pair enumeration.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::DegenerateRanking);
    }
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut ties_x, mut ties_y) = (0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i].total_cmp(&x[j]) as i64;
            let dy = y[i].total_cmp(&y[j]) as i64;
            if dx == 0 {
                ties_x += 1;
            }
            if dy == 0 {
                ties_y += 1;
            }
            match dx * dy {
                1 => concordant += 1,
                -1 => discordant += 1,
                _ => {}
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    if ties_x == n0 || ties_y == n0 {
        return Err(Error::DegenerateRanking);
    }
    let denom = (((n0 - ties_x) * (n0 - ties_y)) as f64).sqrt();
    Ok((concordant - discordant) as f64 / denom)
}

/// Supervised five-part quality decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScopeReport {
    pub core_purity: f64,
    pub boundary_recall: f64,
    pub cluster_precision: f64,
    pub noise_f1: f64,
    pub count_accuracy: f64,
    pub combined: f64,
}

impl ScopeReport {
    pub fn components(&self) -> [f64; 5] {
        [
            self.core_purity,
            self.boundary_recall,
            self.cluster_precision,
            self.noise_f1,
            self.count_accuracy,
        ]
    }
}

/// SCOPE against `truth`, using `g` to split labeled truth points into
/// core (every neighbor shares the truth label) and boundary points.
///
/// Each predicted cluster maps to the truth cluster holding the plurality of
/// its labeled members (ties to the smaller id). When the core or boundary
/// set is empty, its component is measured over all labeled truth points;
/// when truth has no labeled points at all, both are vacuously 1.
pub fn scope(pred: &Labeling, truth: &Labeling, g: &UndirectedGraph) -> Result<ScopeReport> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if g.n() != truth.len() {
        return Err(Error::LengthMismatch {
            left: g.n(),
            right: truth.len(),
        });
    }
    let n = truth.len();
    let cp = pred.n_clusters();
    let ct = truth.n_clusters();

    // Contingency of predicted clusters against labeled truth clusters.
    let mut table = vec![vec![0usize; ct]; cp];
    let mut pred_sizes = vec![0usize; cp];
    for i in 0..n {
        let p = pred.get(i);
        if p == NOISE {
            continue;
        }
        pred_sizes[p as usize] += 1;
        let t = truth.get(i);
        if t != NOISE {
            table[p as usize][t as usize] += 1;
        }
    }
    let mapping: Vec<Option<(usize, usize)>> = table
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold(None, |best: Option<(usize, usize)>, (t, &c)| match best {
                    Some((_, bc)) if bc >= c => best,
                    _ if c > 0 => Some((t, c)),
                    _ => best,
                })
        })
        .collect();
    let mapped = |i: usize| -> Option<usize> {
        let p = pred.get(i);
        if p == NOISE {
            None
        } else {
            mapping[p as usize].map(|(t, _)| t)
        }
    };

    let mut core = Vec::new();
    let mut boundary = Vec::new();
    for i in 0..n {
        let t = truth.get(i);
        if t == NOISE {
            continue;
        }
        if g.neighbors(i).iter().all(|&j| truth.get(j) == t) {
            core.push(i);
        } else {
            boundary.push(i);
        }
    }
    let labeled: Vec<usize> = core.iter().chain(&boundary).copied().collect();

    let purity_over = |set: &[usize]| -> f64 {
        let hit = set
            .iter()
            .filter(|&&i| mapped(i) == Some(truth.get(i) as usize))
            .count();
        hit as f64 / set.len() as f64
    };
    let recall_over = |set: &[usize]| -> f64 {
        let hit = set.iter().filter(|&&i| !pred.is_noise(i)).count();
        hit as f64 / set.len() as f64
    };
    let (core_purity, boundary_recall) = if labeled.is_empty() {
        (1.0, 1.0)
    } else {
        let cp_set = if core.is_empty() { &labeled } else { &core };
        let br_set = if boundary.is_empty() { &labeled } else { &boundary };
        (purity_over(cp_set), recall_over(br_set))
    };

    let cluster_precision = if cp == 0 {
        0.0
    } else {
        mapping
            .iter()
            .zip(&pred_sizes)
            .map(|(m, &s)| m.map_or(0.0, |(_, c)| c as f64 / s as f64))
            .sum::<f64>()
            / cp as f64
    };

    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for i in 0..n {
        match (pred.is_noise(i), truth.is_noise(i)) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    let noise_f1 = if tp + fp + fn_ == 0 {
        1.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    };

    let count_accuracy =
        1.0 - (cp as f64 - ct as f64).abs() / cp.max(ct).max(1) as f64;

    let comps = [core_purity, boundary_recall, cluster_precision, noise_f1, count_accuracy];
    Ok(ScopeReport {
        core_purity,
        boundary_recall,
        cluster_precision,
        noise_f1,
        count_accuracy,
        combined: comps.iter().sum::<f64>() / 5.0,
    })
}
