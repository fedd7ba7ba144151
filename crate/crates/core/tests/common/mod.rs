#![allow(dead_code)]

use fairdiv::dataset::validate_constraints;
use fairdiv::fis::ThresholdGraph;
use fairdiv::{FairnessConstraints, GroupedDataset, MetricKind};
use itertools::Itertools;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random small instance: n in [8, 16], k in [3, 6], C in [1, 3], L1 or L2,
/// points on a coarse grid so distance ties occur, bounds feasible.
pub fn small_instance(rng: &mut ChaCha8Rng) -> (GroupedDataset, FairnessConstraints) {
    let n = rng.random_range(8..=16);
    let k = rng.random_range(3..=6);
    let groups = rng.random_range(1..=3);
    let metric = if rng.random_bool(0.5) {
        MetricKind::L1
    } else {
        MetricKind::L2
    };
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..2).map(|_| f64::from(rng.random_range(0..40)) / 4.0).collect())
        .collect();
    let labels: Vec<usize> = (0..n)
        .map(|i| if i < groups { i } else { rng.random_range(0..groups) })
        .collect();
    let ds = GroupedDataset::from_rows(rows, labels, metric).unwrap();
    let fc = random_feasible_bounds(rng, &ds, k);
    (ds, fc)
}

pub fn random_feasible_bounds(rng: &mut ChaCha8Rng, ds: &GroupedDataset, k: usize) -> FairnessConstraints {
    let sizes = ds.group_sizes();
    loop {
        let bounds: Vec<(usize, usize)> = sizes
            .iter()
            .map(|&s| {
                let l = rng.random_range(0..=s.min(k));
                let h = rng.random_range(l..=s);
                (l, h)
            })
            .collect();
        let fc = FairnessConstraints::new(k, bounds);
        if validate_constraints(ds, &fc).is_ok() {
            return fc;
        }
    }
}

/// Yes/No by trying every k-subset of the graph's vertices.
pub fn fis_by_enumeration(graph: &ThresholdGraph, ds: &GroupedDataset, fc: &FairnessConstraints) -> bool {
    let m = graph.vertex_count();
    if fc.k > m {
        return false;
    }
    (0..m).combinations(fc.k).any(|positions| {
        let ids: Vec<usize> = positions.iter().map(|&p| graph.vertices()[p]).collect();
        graph.is_independent(&positions) && fc.admits(&ds.count_groups(&ids))
    })
}

/// Random graph over a random scope of at most 16 dataset items.
pub fn random_graph(rng: &mut ChaCha8Rng) -> (GroupedDataset, ThresholdGraph, FairnessConstraints) {
    let n = rng.random_range(1..=20);
    let groups = rng.random_range(1..=n.min(3));
    let labels: Vec<usize> = (0..n)
        .map(|i| if i < groups { i } else { rng.random_range(0..groups) })
        .collect();
    let ds = GroupedDataset::from_rows((0..n).map(|i| vec![i as f64]).collect(), labels, MetricKind::L1).unwrap();
    let mut scope: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.8)).take(16).collect();
    if scope.is_empty() {
        scope.push(0);
    }
    let m = scope.len();
    let density = rng.random_range(0.0..0.7);
    let edges: Vec<(usize, usize)> = (0..m)
        .tuple_combinations()
        .filter(|_| rng.random_bool(density))
        .collect();
    let graph = ThresholdGraph::from_edges(scope, &edges, 1.0);
    let k = rng.random_range(1..=m.min(7));
    let sizes = ds.group_sizes();
    let bounds = sizes
        .iter()
        .map(|&s| {
            let l = rng.random_range(0..=s.min(k).min(3));
            (l, rng.random_range(l..=s))
        })
        .collect();
    (ds, graph, FairnessConstraints::new(k, bounds))
}
