//! Fair independent set: does the threshold graph contain an independent set
//! of exactly `k` vertices whose per-group counts respect the bounds?
//!
//! Independent sets of the graph joining items closer than `δ` are exactly
//! the subsets with diversity at least `δ`, so this decision problem is the
//! work-horse of both solvers. It is answered by a complete branch-and-bound:
//! branch on the undecided vertex of largest remaining degree (include it
//! first, then exclude it) and prune when
//!
//! * the selection already reached `k` without meeting every lower bound,
//! * some group cannot reach its lower bound with the vertices left,
//! * the vertices left cannot complete `k` items within the upper bounds.
//!
//! Groups that hit their upper bound have their undecided vertices dropped,
//! so no group ever exceeds it. Supply counts are tightened with greedy
//! clique covers: an independent set uses at most one vertex per clique.

use std::time::{Duration, Instant};

use crate::dataset::{FairnessConstraints, GroupedDataset};
use crate::error::SolveError;

/// Conflict graph over a set of items: `u ~ v` iff `u ≠ v` and
/// `d(u, v) < threshold`.
///
/// Vertices are addressed by their position in [`vertices`](Self::vertices)
/// (ascending item ids); neighbor lists hold positions and are sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGraph {
    vertices: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
    threshold: f64,
}

impl ThresholdGraph {
    /// Graph from explicit edges between vertex positions. Self-loops are
    /// dropped and duplicate edges merged.
    pub fn from_edges(vertices: Vec<usize>, edges: &[(usize, usize)], threshold: f64) -> Self {
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for &(a, b) in edges {
            if a != b {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Self {
            vertices,
            adjacency,
            threshold,
        }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn neighbors(&self, position: usize) -> &[usize] {
        &self.adjacency[position]
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as position pairs `(a, b)` with `a < b`, lexicographic.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }

    /// True if no two of the given vertex positions are adjacent.
    pub fn is_independent(&self, positions: &[usize]) -> bool {
        positions
            .iter()
            .all(|&a| positions.iter().all(|b| self.adjacency[a].binary_search(b).is_err()))
    }
}

/// Builds the threshold graph over `scope` (deduplicated and sorted).
pub fn build_threshold_graph(
    dataset: &GroupedDataset,
    scope: &[usize],
    delta: f64,
) -> Result<ThresholdGraph, SolveError> {
    if scope.is_empty() {
        return Err(SolveError::InvalidParameter("graph scope is empty".into()));
    }
    let mut vertices = scope.to_vec();
    vertices.sort_unstable();
    vertices.dedup();
    if let Some(&bad) = vertices.iter().find(|&&v| v >= dataset.len()) {
        return Err(SolveError::InvalidParameter(format!("item {bad} is out of range")));
    }
    let m = vertices.len();
    let mut adjacency = vec![Vec::new(); m];
    for a in 0..m {
        for b in a + 1..m {
            if dataset.distance(vertices[a], vertices[b]) < delta {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
    }
    Ok(ThresholdGraph {
        vertices,
        adjacency,
        threshold: delta,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum FisStatus {
    /// A witness: sorted item ids, independent, of size `k`, within bounds.
    Feasible(Vec<usize>),
    Infeasible,
    /// The node budget ran out before the search finished.
    BudgetExhausted,
}

#[derive(Debug, Clone)]
pub struct FisOutcome {
    pub status: FisStatus,
    pub nodes_explored: u64,
    pub elapsed: Duration,
}

impl FisOutcome {
    pub fn witness(&self) -> Option<&[usize]> {
        match &self.status {
            FisStatus::Feasible(ids) => Some(ids),
            _ => None,
        }
    }
}

/// Decides the fair independent set question on `graph`.
///
/// Group sizes are taken within the graph, so bounds that the graph's
/// vertices cannot meet simply yield [`FisStatus::Infeasible`]. The only
/// error is a bound list whose length differs from the dataset's group count.
pub fn solve_fis(
    graph: &ThresholdGraph,
    dataset: &GroupedDataset,
    fc: &FairnessConstraints,
    node_budget: Option<u64>,
) -> Result<FisOutcome, SolveError> {
    if fc.group_count() != dataset.group_count() {
        return Err(SolveError::InvalidParameter(format!(
            "{} bound pairs given for {} groups",
            fc.group_count(),
            dataset.group_count()
        )));
    }
    let started = Instant::now();
    let mut search = Search::new(graph, dataset, fc, node_budget);
    let status = if fc.k == 0 || fc.bounds.iter().any(|&(l, h)| l > h) {
        FisStatus::Infeasible
    } else {
        let all = Bits::full(graph.vertex_count());
        let mut counts = vec![0; dataset.group_count()];
        match search.visit(all, &mut counts) {
            Step::Found => {
                let mut ids: Vec<usize> = search.chosen.iter().map(|&p| graph.vertices[p]).collect();
                ids.sort_unstable();
                FisStatus::Feasible(ids)
            }
            Step::Pruned => FisStatus::Infeasible,
            Step::OutOfBudget => FisStatus::BudgetExhausted,
        }
    };
    Ok(FisOutcome {
        status,
        nodes_explored: search.nodes,
        elapsed: started.elapsed(),
    })
}

/// Fixed-size bitset over vertex positions.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn full(n: usize) -> Self {
        let mut bits = Self::empty(n);
        for i in 0..n {
            bits.insert(i);
        }
        bits
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    #[cfg(test)]
    fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[cfg(test)]
    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn and_len(&self, other: &Bits) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn intersect_with(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= b;
        }
    }

    fn subtract(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= !b;
        }
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * 64 + bit)
            })
        })
    }
}

enum Step {
    Found,
    Pruned,
    OutOfBudget,
}

struct Search {
    k: usize,
    lower: Vec<usize>,
    upper: Vec<usize>,
    group_of: Vec<usize>,
    group_masks: Vec<Bits>,
    neighbors: Vec<Bits>,
    chosen: Vec<usize>,
    nodes: u64,
    budget: Option<u64>,
}

impl Search {
    fn new(graph: &ThresholdGraph, dataset: &GroupedDataset, fc: &FairnessConstraints, budget: Option<u64>) -> Self {
        let m = graph.vertex_count();
        let group_of: Vec<usize> = graph.vertices.iter().map(|&v| dataset.group_of(v)).collect();
        let mut group_masks = vec![Bits::empty(m); dataset.group_count()];
        for (p, &g) in group_of.iter().enumerate() {
            group_masks[g].insert(p);
        }
        let neighbors = graph
            .adjacency
            .iter()
            .map(|list| {
                let mut bits = Bits::empty(m);
                for &q in list {
                    bits.insert(q);
                }
                bits
            })
            .collect();
        Self {
            k: fc.k,
            lower: fc.bounds.iter().map(|b| b.0).collect(),
            upper: fc.bounds.iter().map(|b| b.1).collect(),
            group_of,
            group_masks,
            neighbors,
            chosen: Vec::with_capacity(fc.k),
            nodes: 0,
            budget,
        }
    }

    /// Size of a greedy clique cover of `set`: an upper bound on the size of
    /// any independent subset of `set`.
    fn clique_cover(&self, set: &Bits) -> usize {
        let mut commons: Vec<Bits> = Vec::new();
        for v in set.iter() {
            match commons.iter_mut().find(|common| common.contains(v)) {
                Some(common) => common.intersect_with(&self.neighbors[v]),
                None => commons.push(self.neighbors[v].and(set)),
            }
        }
        commons.len()
    }

    fn visit(&mut self, mut undecided: Bits, counts: &mut [usize]) -> Step {
        self.nodes += 1;
        if self.budget.is_some_and(|b| self.nodes > b) {
            return Step::OutOfBudget;
        }
        let groups = counts.len();
        for (c, mask) in self.group_masks.iter().enumerate() {
            if counts[c] >= self.upper[c] {
                undecided.subtract(mask);
            }
        }
        let chosen = self.chosen.len();
        if chosen == self.k {
            return if (0..groups).all(|c| counts[c] >= self.lower[c]) {
                Step::Found
            } else {
                Step::Pruned
            };
        }
        let need = self.k - chosen;

        let avail: Vec<usize> = self.group_masks.iter().map(|m| undecided.and_len(m)).collect();
        let deficit: usize = (0..groups).map(|c| self.lower[c].saturating_sub(counts[c])).sum();
        if deficit > need || (0..groups).any(|c| counts[c] + avail[c] < self.lower[c]) {
            return Step::Pruned;
        }
        let room = |c: usize, supply: usize| (self.upper[c] - counts[c]).min(supply);
        if (0..groups).map(|c| room(c, avail[c])).sum::<usize>() < need {
            return Step::Pruned;
        }

        // Branching vertex: largest degree among undecided, smallest position on ties.
        let mut pivot = None;
        let mut pivot_degree = 0;
        for v in undecided.iter() {
            let degree = self.neighbors[v].and_len(&undecided);
            if pivot.is_none() || degree > pivot_degree {
                pivot = Some(v);
                pivot_degree = degree;
            }
        }
        let Some(pivot) = pivot else {
            return Step::Pruned;
        };
        if pivot_degree == 0 {
            return self.complete_edgeless(&undecided, counts, &avail);
        }

        // Clique-cover bounds, per group and overall.
        let mut capped = 0;
        for c in 0..groups {
            if avail[c] == 0 {
                continue;
            }
            let cover = self.clique_cover(&undecided.and(&self.group_masks[c]));
            if counts[c] + cover < self.lower[c] {
                return Step::Pruned;
            }
            capped += room(c, cover);
        }
        if capped < need || self.clique_cover(&undecided) < need {
            return Step::Pruned;
        }

        let group = self.group_of[pivot];
        let mut with = undecided.clone();
        with.remove(pivot);
        with.subtract(&self.neighbors[pivot]);
        self.chosen.push(pivot);
        counts[group] += 1;
        match self.visit(with, counts) {
            Step::Pruned => {}
            done => return done,
        }
        counts[group] -= 1;
        self.chosen.pop();

        undecided.remove(pivot);
        self.visit(undecided, counts)
    }

    /// No edges remain among `undecided`: any choice of counts in
    /// `[max(0, l_c - x_c), min(h_c - x_c, avail_c)]` summing to `need` works.
    /// Takes the smallest positions: lower-bound deficits first, then the
    /// remainder in group order.
    fn complete_edgeless(&mut self, undecided: &Bits, counts: &mut [usize], avail: &[usize]) -> Step {
        let need = self.k - self.chosen.len();
        let groups = counts.len();
        let lo: Vec<usize> = (0..groups).map(|c| self.lower[c].saturating_sub(counts[c])).collect();
        let hi: Vec<usize> = (0..groups).map(|c| (self.upper[c] - counts[c]).min(avail[c])).collect();
        if lo.iter().sum::<usize>() > need || hi.iter().sum::<usize>() < need {
            return Step::Pruned;
        }
        let mut take = lo.clone();
        let mut remaining = need - lo.iter().sum::<usize>();
        for c in 0..groups {
            let extra = (hi[c] - take[c]).min(remaining);
            take[c] += extra;
            remaining -= extra;
        }
        debug_assert_eq!(remaining, 0);
        for (c, &want) in take.iter().enumerate() {
            let picks: Vec<usize> = undecided.and(&self.group_masks[c]).iter().take(want).collect();
            for p in picks {
                self.chosen.push(p);
                counts[c] += 1;
            }
        }
        Step::Found
    }
}
