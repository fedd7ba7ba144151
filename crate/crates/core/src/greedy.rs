//! Farthest-point greedy selection.
//!
//! [`gmm`] is the classic unconstrained ½-approximation for max-min
//! diversification. [`fill_group`] is its threshold-limited, single-group
//! variant used to grow the per-group coreset of the scalable solver.

use crate::dataset::GroupedDataset;
use crate::error::SolveError;

/// Picks `k` items farthest-first, starting from `start`. Each later pick
/// maximizes the minimum distance to the items already picked, ties going to
/// the smallest id. Already-picked items are never picked again, so `k = n`
/// yields a permutation even with duplicate points.
pub fn gmm(dataset: &GroupedDataset, k: usize, start: usize) -> Result<Vec<usize>, SolveError> {
    let n = dataset.len();
    if k == 0 || k > n {
        return Err(SolveError::InvalidParameter(format!(
            "greedy size k = {k} must be between 1 and n = {n}"
        )));
    }
    if start >= n {
        return Err(SolveError::InvalidParameter(format!(
            "start item {start} is out of range for n = {n}"
        )));
    }
    let mut picked = vec![false; n];
    let mut gap = vec![f64::INFINITY; n];
    let mut order = Vec::with_capacity(k);
    let mut next = start;
    loop {
        order.push(next);
        picked[next] = true;
        if order.len() == k {
            return Ok(order);
        }
        let mut best: Option<(usize, f64)> = None;
        for v in 0..n {
            if picked[v] {
                continue;
            }
            let d = dataset.distance(next, v);
            if d < gap[v] {
                gap[v] = d;
            }
            if best.is_none_or(|(_, b)| gap[v] > b) {
                best = Some((v, gap[v]));
            }
        }
        next = best.expect("k <= n leaves an unpicked item").0;
    }
}

/// Grows `seed` inside group `c` farthest-first while fewer than `cap` items
/// are held and the farthest remaining group member `v` keeps
/// `div(U ∪ {v}) ≥ d_prime`.
///
/// Only the farthest candidate is tested: if it fails the threshold every
/// other candidate fails too. The returned ids are in insertion order, seed
/// first.
pub fn fill_group(
    dataset: &GroupedDataset,
    c: usize,
    seed: &[usize],
    d_prime: f64,
    cap: usize,
) -> Result<Vec<usize>, SolveError> {
    if d_prime.is_nan() {
        return Err(SolveError::InvalidParameter("threshold is NaN".into()));
    }
    let mut fill = GroupFill::new(dataset, c, seed)?;
    fill.extend(d_prime, cap);
    Ok(fill.selected)
}

/// Incremental state of one group's greedy fill. Lowering the threshold and
/// calling [`extend`](Self::extend) again continues the same farthest-first
/// sequence a fresh run at the lower threshold would produce.
#[derive(Debug, Clone)]
pub(crate) struct GroupFill<'a> {
    dataset: &'a GroupedDataset,
    members: &'a [usize],
    selected: Vec<usize>,
    taken: Vec<bool>,
    /// Per member: minimum distance to the selected items (`+∞` while empty).
    gap: Vec<f64>,
    /// `div(selected)`.
    internal: f64,
}

impl<'a> GroupFill<'a> {
    pub(crate) fn new(dataset: &'a GroupedDataset, c: usize, seed: &[usize]) -> Result<Self, SolveError> {
        if c >= dataset.group_count() {
            return Err(SolveError::InvalidParameter(format!("group {c} does not exist")));
        }
        let members = dataset.members(c);
        let mut fill = Self {
            dataset,
            members,
            selected: Vec::with_capacity(seed.len()),
            taken: vec![false; members.len()],
            gap: vec![f64::INFINITY; members.len()],
            internal: f64::INFINITY,
        };
        for &id in seed {
            let pos = members
                .binary_search(&id)
                .map_err(|_| SolveError::InvalidParameter(format!("seed item {id} is not in group {c}")))?;
            if !fill.taken[pos] {
                fill.take(pos);
            }
        }
        Ok(fill)
    }

    fn take(&mut self, pos: usize) {
        self.internal = self.internal.min(self.gap[pos]);
        self.taken[pos] = true;
        let id = self.members[pos];
        self.selected.push(id);
        for (q, &other) in self.members.iter().enumerate() {
            if !self.taken[q] {
                let d = self.dataset.distance(id, other);
                if d < self.gap[q] {
                    self.gap[q] = d;
                }
            }
        }
    }

    /// Farthest untaken member as (position, gap); smallest id on ties.
    fn farthest(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (q, &g) in self.gap.iter().enumerate() {
            if !self.taken[q] && best.is_none_or(|(_, b)| g > b) {
                best = Some((q, g));
            }
        }
        best
    }

    /// The value `div(U ∪ {v})` for the farthest candidate `v`, if any.
    fn admission_value(&self) -> Option<(usize, f64)> {
        self.farthest().map(|(q, g)| (q, self.internal.min(g)))
    }

    /// Runs the fill at threshold `d_prime`; returns how many items it added.
    pub(crate) fn extend(&mut self, d_prime: f64, cap: usize) -> usize {
        let before = self.selected.len();
        while self.selected.len() < cap {
            match self.admission_value() {
                Some((q, value)) if value >= d_prime => self.take(q),
                _ => break,
            }
        }
        self.selected.len() - before
    }

    /// Largest positive threshold at which [`extend`](Self::extend) would add
    /// an item, or `None` if no positive threshold ever will.
    pub(crate) fn next_admission(&self, cap: usize) -> Option<f64> {
        if self.selected.len() >= cap {
            return None;
        }
        self.admission_value().map(|(_, value)| value).filter(|&v| v > 0.0)
    }

    pub(crate) fn selected(&self) -> &[usize] {
        &self.selected
    }
}
