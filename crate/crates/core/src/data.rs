//! Datasets, labelings and their CSV formats.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label reserved for noise points, in memory and on disk.
pub const NOISE: i64 = -1;

/// Per-point cluster assignment. Cluster ids are dense in `0..n_clusters`;
/// every id appears at least once; noise is [`NOISE`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Labeling {
    labels: Vec<i64>,
    n_clusters: usize,
}

impl Labeling {
    /// Validates an already-dense labeling without renumbering it.
    pub fn new(labels: Vec<i64>) -> Result<Self> {
        let mut max = -1i64;
        for (i, &l) in labels.iter().enumerate() {
            if l < NOISE {
                return Err(Error::InvalidLabeling(format!("label {l} at index {i}")));
            }
            max = max.max(l);
        }
        let n_clusters = (max + 1) as usize;
        let mut seen = vec![false; n_clusters];
        for &l in &labels {
            if l >= 0 {
                seen[l as usize] = true;
            }
        }
        if let Some(gap) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidLabeling(format!("cluster id {gap} is unused")));
        }
        Ok(Self { labels, n_clusters })
    }

    /// Every point noise.
    pub fn all_noise(n: usize) -> Self {
        Self {
            labels: vec![NOISE; n],
            n_clusters: 0,
        }
    }

    /// Every point in cluster 0.
    pub fn single_cluster(n: usize) -> Self {
        Self {
            labels: vec![0; n],
            n_clusters: usize::from(n > 0),
        }
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn get(&self, i: usize) -> i64 {
        self.labels[i]
    }

    pub fn is_noise(&self, i: usize) -> bool {
        self.labels[i] == NOISE
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }

    pub fn noise_fraction(&self) -> f64 {
        if self.labels.is_empty() {
            0.0
        } else {
            self.noise_count() as f64 / self.labels.len() as f64
        }
    }

    /// Sizes of clusters `0..n_clusters`.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for &l in &self.labels {
            if l >= 0 {
                sizes[l as usize] += 1;
            }
        }
        sizes
    }

    /// Restriction to the given point indices, renumbered densely
    /// while keeping the relative order of the surviving ids.
    pub fn subset(&self, indices: &[usize]) -> Labeling {
        compact(indices.iter().map(|&i| self.labels[i]).collect())
    }

    pub fn into_inner(self) -> Vec<i64> {
        self.labels
    }
}

impl TryFrom<Vec<i64>> for Labeling {
    type Error = Error;

    fn try_from(labels: Vec<i64>) -> Result<Self> {
        Labeling::new(labels)
    }
}

impl From<Labeling> for Vec<i64> {
    fn from(l: Labeling) -> Self {
        l.labels
    }
}

/// Maps arbitrary integer labels to a [`Labeling`]: every negative value
/// becomes noise and the remaining ids are numbered `0..C` in order of
/// first appearance.
pub fn canonicalize(raw: &[i64]) -> Labeling {
    let mut ids: HashMap<i64, i64> = HashMap::new();
    let labels = raw
        .iter()
        .map(|&l| {
            if l < 0 {
                NOISE
            } else {
                let next = ids.len() as i64;
                *ids.entry(l).or_insert(next)
            }
        })
        .collect();
    Labeling {
        labels,
        n_clusters: ids.len(),
    }
}

/// Removes gaps from non-negative ids, preserving their relative order.
pub(crate) fn compact(labels: Vec<i64>) -> Labeling {
    let mut present: Vec<i64> = labels.iter().copied().filter(|&l| l >= 0).collect();
    present.sort_unstable();
    present.dedup();
    let rank: HashMap<i64, i64> = present
        .iter()
        .enumerate()
        .map(|(r, &l)| (l, r as i64))
        .collect();
    let labels = labels
        .into_iter()
        .map(|l| if l < 0 { NOISE } else { rank[&l] })
        .collect();
    Labeling {
        labels,
        n_clusters: present.len(),
    }
}

/// Dense row-major `n x d` matrix of finite values with optional ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    n: usize,
    d: usize,
    truth: Option<Labeling>,
}

impl Dataset {
    pub fn new(points: Vec<f64>, n: usize, d: usize, truth: Option<Labeling>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidDataset(format!("shape {n}x{d} is empty")));
        }
        if points.len() != n * d {
            return Err(Error::InvalidDataset(format!(
                "{} values for shape {n}x{d}",
                points.len()
            )));
        }
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCell {
                row: pos / d,
                col: pos % d,
            });
        }
        if let Some(t) = &truth {
            if t.len() != n {
                return Err(Error::LengthMismatch {
                    left: n,
                    right: t.len(),
                });
            }
        }
        Ok(Self { points, n, d, truth })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::RaggedRow {
                row,
                expected: d,
                found: r.len(),
            });
        }
        Self::new(rows.concat(), rows.len(), d, None)
    }

    pub fn with_truth(mut self, truth: Labeling) -> Result<Self> {
        if truth.len() != self.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: truth.len(),
            });
        }
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.points.chunks_exact(self.d)
    }

    pub fn truth(&self) -> Option<&Labeling> {
        self.truth.as_ref()
    }

    /// Rows at `indices`, with truth restricted accordingly.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let mut points = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            points.extend_from_slice(self.row(i));
        }
        let truth = self.truth.as_ref().map(|t| t.subset(indices));
        Dataset::new(points, indices.len(), self.d, truth)
    }

    /// Every coordinate multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Dataset> {
        let points = self.points.iter().map(|v| v * c).collect();
        Dataset::new(points, self.n, self.d, self.truth.clone())
    }
}

/// Squared Euclidean distance with four independent accumulators.
#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for l in 0..4 {
            let t = x[l] - y[l];
            acc[l] += t * t;
        }
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        let t = x - y;
        tail += t * t;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

fn parse_label(cell: &str, row: usize, col: usize) -> Result<i64> {
    let cell = cell.trim();
    if let Ok(v) = cell.parse::<i64>() {
        return Ok(v);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() && v.fract() == 0.0 => Ok(v as i64),
        _ => Err(Error::NonNumericCell {
            row,
            col,
            value: cell.to_string(),
        }),
    }
}

/// Reads a numeric CSV. Rows and columns in errors are 1-based file
/// positions. A named label column becomes the dataset's truth, with
/// negative values read as noise.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool, label_column: Option<&str>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file);

    let mut records = reader.records();
    let mut label_idx = None;
    let mut first_line = 1;
    if has_header {
        let header = match records.next() {
            Some(h) => h?,
            None => return Err(Error::InvalidDataset("file has no header".into())),
        };
        first_line = 2;
        if let Some(name) = label_column {
            label_idx = Some(
                header
                    .iter()
                    .position(|h| h.trim() == name)
                    .ok_or_else(|| Error::MissingLabelColumn(name.to_string()))?,
            );
        }
    } else if let Some(name) = label_column {
        return Err(Error::MissingLabelColumn(name.to_string()));
    }

    let mut points = Vec::new();
    let mut raw_labels = Vec::new();
    let mut width = None;
    let mut n = 0;
    for (r, rec) in records.enumerate() {
        let rec = rec?;
        let row = first_line + r;
        if rec.len() == 1 && rec.get(0).is_some_and(|c| c.trim().is_empty()) {
            continue;
        }
        let expected = *width.get_or_insert(rec.len());
        if rec.len() != expected {
            return Err(Error::RaggedRow {
                row,
                expected,
                found: rec.len(),
            });
        }
        for (c, cell) in rec.iter().enumerate() {
            let col = c + 1;
            if Some(c) == label_idx {
                raw_labels.push(parse_label(cell, row, col)?);
                continue;
            }
            let v: f64 = cell.trim().parse().map_err(|_| Error::NonNumericCell {
                row,
                col,
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteCell { row, col });
            }
            points.push(v);
        }
        n += 1;
    }
    let width = width.ok_or_else(|| Error::InvalidDataset("no data rows".into()))?;
    let d = width - usize::from(label_idx.is_some());
    let truth = label_idx.map(|_| canonicalize(&raw_labels));
    Dataset::new(points, n, d, truth)
}

/// Writes the matrix with shortest round-trip float formatting; when the
/// dataset has truth it is appended as a final `label` column.
pub fn save_csv(data: &Dataset, path: impl AsRef<Path>, header: bool) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        if header {
            let mut cols: Vec<String> = (0..data.d()).map(|j| format!("x{j}")).collect();
            if data.truth().is_some() {
                cols.push("label".into());
            }
            writeln!(w, "{}", cols.join(","))?;
        }
        for (i, row) in data.rows().enumerate() {
            let mut first = true;
            for v in row {
                if !first {
                    w.write_all(b",")?;
                }
                first = false;
                write!(w, "{v:?}")?;
            }
            if let Some(t) = data.truth() {
                write!(w, ",{}", t.get(i))?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

/// One integer per line, `-1` for noise.
pub fn save_labels(labeling: &Labeling, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(labeling.len() * 3);
    for &l in labeling.labels() {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a label file and canonicalizes it.
pub fn load_labels(path: impl AsRef<Path>) -> Result<Labeling> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut raw = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        raw.push(parse_label(line, i + 1, 1)?);
    }
    Ok(canonicalize(&raw))
}
