//! Exact solver: binary search over the sorted pairwise distances.
//!
//! The optimum always equals some pairwise distance, and whether a fair
//! subset with diversity `≥ δ` exists is monotone in `δ`. Searching the
//! sorted distance array with one fair-independent-set query per probe
//! therefore lands on the optimum after `⌊log₂ N⌋ + 1` probes for `N` pairs.

use std::time::Instant;

use crate::dataset::{validate_constraints, FairnessConstraints, GroupedDataset};
use crate::error::SolveError;
use crate::fis::{build_threshold_graph, solve_fis, FisStatus};
use crate::geometry::{sorted_pairwise, DEFAULT_MAX_PAIRWISE_ITEMS};
use crate::solution::{Diagnostics, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOptions {
    /// Branch-and-bound node limit per probe; `None` is unlimited.
    pub node_budget: Option<u64>,
    /// Largest `n` for which the pairwise table is built.
    pub max_items: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            node_budget: None,
            max_items: DEFAULT_MAX_PAIRWISE_ITEMS,
        }
    }
}

/// Returns an optimal feasible subset.
///
/// Diagnostics: `iterations` (probes), `ilp_nodes` (branch-and-bound nodes
/// over all probes), `pairs`, `final_threshold` (largest feasible probed
/// distance, equal to the optimum) and `elapsed_ms`.
pub fn solve_exact(
    dataset: &GroupedDataset,
    fc: &FairnessConstraints,
    options: &ExactOptions,
) -> Result<Solution, SolveError> {
    let started = Instant::now();
    validate_constraints(dataset, fc).map_err(SolveError::InvalidConstraints)?;
    if fc.k < 2 {
        return Err(SolveError::InvalidParameter(format!(
            "the exact solver needs k >= 2, got {}",
            fc.k
        )));
    }
    let distances = sorted_pairwise(dataset, options.max_items)?;
    let scope: Vec<usize> = (0..dataset.len()).collect();

    let mut probes = 0u64;
    let mut nodes = 0u64;
    let mut best: Option<(Vec<usize>, f64)> = None;
    // Inclusive window over slots; every probe shrinks it.
    let (mut lo, mut hi) = (0usize, distances.len() - 1);
    loop {
        let mid = lo + (hi - lo) / 2;
        let threshold = distances.value(mid);
        let graph = build_threshold_graph(dataset, &scope, threshold)?;
        let outcome = solve_fis(&graph, dataset, fc, options.node_budget)?;
        probes += 1;
        nodes += outcome.nodes_explored;
        let feasible = match outcome.status {
            FisStatus::Feasible(ids) => {
                let value = crate::geometry::div(dataset, &ids);
                if best.as_ref().is_none_or(|(_, b)| value > *b) {
                    best = Some((ids, value));
                }
                true
            }
            FisStatus::Infeasible => false,
            FisStatus::BudgetExhausted => {
                let best = best.map(|(ids, _)| {
                    let mut diag = Diagnostics::default();
                    diag.set_count("iterations", probes);
                    diag.set_count("ilp_nodes", nodes);
                    Box::new(Solution::new(dataset, ids, diag))
                });
                return Err(SolveError::NodeBudget { nodes, best });
            }
        };
        if feasible {
            if mid == hi {
                break;
            }
            lo = mid + 1;
        } else {
            if mid == lo {
                break;
            }
            hi = mid - 1;
        }
    }

    // The smallest distance admits every feasible subset, so some probe
    // succeeded whenever the constraints are satisfiable.
    let (ids, value) = best.expect("validated constraints admit a subset at the smallest distance");
    let mut diag = Diagnostics::default();
    diag.set_count("iterations", probes);
    diag.set_count("ilp_nodes", nodes);
    diag.set_count("pairs", distances.len() as u64);
    diag.set_real("final_threshold", value);
    diag.set_real("elapsed_ms", started.elapsed().as_secs_f64() * 1e3);
    Ok(Solution::new(dataset, ids, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Violation;
    use crate::geometry::{div, MetricKind};

    fn line(xs: &[f64], groups: &[usize]) -> GroupedDataset {
        GroupedDataset::from_rows(xs.iter().map(|&x| vec![x]).collect(), groups.to_vec(), MetricKind::L1).unwrap()
    }

    fn even_odd() -> GroupedDataset {
        line(
            &(0..10).map(f64::from).collect::<Vec<_>>(),
            &(0..10).map(|i| i % 2).collect::<Vec<_>>(),
        )
    }

    #[test]
    fn line_of_ten() {
        let ds = even_odd();
        let fc = FairnessConstraints::new(4, vec![(1, 3), (1, 3)]);
        let sol = solve_exact(&ds, &fc, &ExactOptions::default()).unwrap();
        assert_eq!(sol.diversity, 3.0);
        assert!(sol.verify(&ds, Some(&fc)).is_empty());
        let probes = sol.diagnostics.count("iterations").unwrap();
        assert!(probes <= (45f64).log2().ceil() as u64 + 1, "{probes}");
        assert_eq!(sol.diagnostics.get("final_threshold"), Some(3.0));
    }

    #[test]
    fn whole_set_when_k_equals_n() {
        let ds = line(&[0.0, 4.0, 5.5, 9.0, 20.0], &[0, 1, 0, 1, 0]);
        let fc = FairnessConstraints::new(5, vec![(3, 3), (2, 2)]);
        let sol = solve_exact(&ds, &fc, &ExactOptions::default()).unwrap();
        assert_eq!(sol.selected, vec![0, 1, 2, 3, 4]);
        assert_eq!(sol.diversity, div(&ds, &[0, 1, 2, 3, 4]));
    }

    #[test]
    fn two_candidates() {
        // x = 0 alone in group 0; y = 5 and z = 9 in group 1.
        let ds = line(&[0.0, 5.0, 9.0], &[0, 1, 1]);
        let fc = FairnessConstraints::new(2, vec![(1, 1), (1, 1)]);
        let sol = solve_exact(&ds, &fc, &ExactOptions::default()).unwrap();
        assert_eq!(sol.selected, vec![0, 2]);
        assert_eq!(sol.diversity, 9.0);
    }

    #[test]
    fn duplicates_and_zero_optimum() {
        // Group 0 holds three copies of one point and needs two of them.
        let ds = line(&[1.0, 1.0, 1.0, 7.0], &[0, 0, 0, 1]);
        let fc = FairnessConstraints::new(3, vec![(2, 3), (0, 1)]);
        let sol = solve_exact(&ds, &fc, &ExactOptions::default()).unwrap();
        assert_eq!(sol.diversity, 0.0);
        assert!(sol.verify(&ds, Some(&fc)).is_empty());
    }

    #[test]
    fn rejects_invalid_input() {
        let ds = even_odd();
        let err = solve_exact(
            &ds,
            &FairnessConstraints::new(4, vec![(3, 3), (3, 3)]),
            &ExactOptions::default(),
        )
        .unwrap_err();
        match err {
            SolveError::InvalidConstraints(report) => {
                assert_eq!(report.0, vec![Violation::LowerSumAboveK { sum: 6, k: 4 }])
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            solve_exact(
                &ds,
                &FairnessConstraints::new(1, vec![(0, 1), (0, 1)]),
                &ExactOptions::default()
            ),
            Err(SolveError::InvalidParameter(_))
        ));
        let small = ExactOptions {
            max_items: 5,
            ..ExactOptions::default()
        };
        assert!(matches!(
            solve_exact(&ds, &FairnessConstraints::new(4, vec![(1, 3), (1, 3)]), &small),
            Err(SolveError::Geometry(_))
        ));
    }

    #[test]
    fn node_budget_surfaces_as_error() {
        let ds = GroupedDataset::from_rows(
            (0..14)
                .map(|i| vec![f64::from(i * 5 % 14), f64::from(i * 3 % 11)])
                .collect(),
            vec![0; 14],
            MetricKind::L2,
        )
        .unwrap();
        let fc = FairnessConstraints::new(6, vec![(0, 14)]);
        let tight = ExactOptions {
            node_budget: Some(1),
            ..ExactOptions::default()
        };
        match solve_exact(&ds, &fc, &tight) {
            Err(SolveError::NodeBudget { best, .. }) => {
                if let Some(best) = best {
                    assert!(best.verify(&ds, Some(&fc)).is_empty());
                }
            }
            Ok(sol) => {
                // Every probe resolved in a single node; nothing to exhaust.
                assert!(sol.diagnostics.count("ilp_nodes").unwrap() <= sol.diagnostics.count("iterations").unwrap());
            }
            Err(other) => panic!("unexpected {other:?}"),
        }
    }
}
