//! Distances, the diversity objective and pairwise-distance tables.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::GroupedDataset;
use crate::error::GeometryError;

/// Default cap on `n` for [`sorted_pairwise`]: 20 000 items is roughly
/// 2·10⁸ pairs.
pub const DEFAULT_MAX_PAIRWISE_ITEMS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    L1,
    L2,
    /// `arccos` of the cosine similarity, clamped to `[-1, 1]`.
    Angular,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::L1 => "l1",
            MetricKind::L2 => "l2",
            MetricKind::Angular => "angular",
        })
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "manhattan" => Ok(MetricKind::L1),
            "l2" | "euclidean" => Ok(MetricKind::L2),
            "angular" => Ok(MetricKind::Angular),
            other => Err(format!("unknown metric {other:?}; expected l1, l2 or angular")),
        }
    }
}

impl MetricKind {
    /// Distance between two raw vectors of equal length.
    pub fn eval(self, u: &[f64], v: &[f64]) -> f64 {
        match self {
            MetricKind::L1 => u.iter().zip(v).map(|(a, b)| (a - b).abs()).sum(),
            MetricKind::L2 => u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            MetricKind::Angular => {
                let norm = |w: &[f64]| w.iter().map(|x| x * x).sum::<f64>().sqrt();
                angle(dot(u, v), norm(u) * norm(v))
            }
        }
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn angle(dot: f64, norms: f64) -> f64 {
    (dot / norms).clamp(-1.0, 1.0).acos()
}

impl GroupedDataset {
    /// Distance between items `i` and `j` under the dataset's metric.
    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (u, v) = (self.features(i), self.features(j));
        match self.metric() {
            MetricKind::Angular => angle(dot(u, v), self.norm(i) * self.norm(j)),
            metric => metric.eval(u, v),
        }
    }
}

pub fn distance(dataset: &GroupedDataset, i: usize, j: usize) -> f64 {
    dataset.distance(i, j)
}

/// Minimum pairwise distance among `ids`; `+∞` when fewer than two ids.
pub fn div(dataset: &GroupedDataset, ids: &[usize]) -> f64 {
    let mut best = f64::INFINITY;
    for (a, &i) in ids.iter().enumerate() {
        for &j in &ids[a + 1..] {
            best = best.min(dataset.distance(i, j));
        }
    }
    best
}

/// All `n(n-1)/2` pairwise distances in ascending order. Equal values keep
/// lexicographic `(i, j)` order.
#[derive(Debug, Clone)]
pub struct SortedDistances {
    values: Vec<f64>,
    pairs: Vec<(u32, u32)>,
}

impl SortedDistances {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, slot: usize) -> f64 {
        self.values[slot]
    }

    pub fn pair(&self, slot: usize) -> (usize, usize) {
        let (i, j) = self.pairs[slot];
        (i as usize, j as usize)
    }
}

pub fn sorted_pairwise(dataset: &GroupedDataset, max_items: usize) -> Result<SortedDistances, GeometryError> {
    let n = dataset.len();
    if n < 2 {
        return Err(GeometryError::TooFewItems(n));
    }
    if n > max_items || n > u32::MAX as usize {
        return Err(GeometryError::PairwiseBudget { n, max: max_items });
    }
    let mut entries: Vec<(f64, (u32, u32))> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            entries.push((dataset.distance(i, j), (i as u32, j as u32)));
        }
    }
    // Stable: ties stay in generation order, which is lexicographic.
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (values, pairs) = entries.into_iter().unzip();
    Ok(SortedDistances { values, pairs })
}

/// The candidate farthest from `anchor` (largest minimum distance), with that
/// distance. Ties go to the smallest id.
pub fn farthest_from_set(
    dataset: &GroupedDataset,
    candidates: &[usize],
    anchor: &[usize],
) -> Result<(usize, f64), GeometryError> {
    if anchor.is_empty() {
        return Err(GeometryError::EmptyAnchor);
    }
    let mut best: Option<(usize, f64)> = None;
    for &v in candidates {
        let gap = anchor
            .iter()
            .map(|&u| dataset.distance(u, v))
            .fold(f64::INFINITY, f64::min);
        best = match best {
            Some((id, d)) if d > gap || (d == gap && id < v) => Some((id, d)),
            _ => Some((v, gap)),
        };
    }
    best.ok_or(GeometryError::EmptyCandidates)
}
