//! Coreset-based approximation with guarantee `div(S) ≥ (1 - ε)/5 · OPT`.
//!
//! 1. Run farthest-first greedy for `k` items over the whole dataset; the
//!    optimum is at most `d' = 2·div(U)`.
//! 2. Split the greedy picks by group and grow each group's share greedily
//!    (at most `k` items, each new item at least `d'` from the others).
//! 3. Ask for a fair independent set of size `k` in the threshold graph of
//!    the union at `δ = d'/2`. If there is one, return it; otherwise shrink
//!    `d'` by `1 - ε` and repeat from step 2.
//!
//! Group fills resume where the previous round stopped: a lower threshold
//! only lets the same farthest-first sequence run longer.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::{validate_constraints, FairnessConstraints, GroupedDataset};
use crate::error::SolveError;
use crate::fis::{build_threshold_graph, solve_fis, FisStatus};
use crate::geometry::div;
use crate::greedy::{gmm, GroupFill};
use crate::solution::{Diagnostics, Solution};

pub const DEFAULT_EPSILON: f64 = 0.05;

/// What to do once shrinking the threshold can no longer change the coreset
/// or its graph while no feasible subset has been found. This only happens
/// when duplicate points leave some group without enough distinct items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FloorPolicy {
    /// Fail with [`SolveError::Degenerate`] naming the short groups.
    #[default]
    Error,
    /// Fill every group to capacity and solve on the edgeless graph; the
    /// result is feasible but may have diversity 0.
    ZeroThreshold,
}

impl FromStr for FloorPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "error" => Ok(FloorPolicy::Error),
            "zero-threshold" => Ok(FloorPolicy::ZeroThreshold),
            other => Err(format!(
                "unknown floor policy {other:?}; expected error or zero-threshold"
            )),
        }
    }
}

impl fmt::Display for FloorPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FloorPolicy::Error => "error",
            FloorPolicy::ZeroThreshold => "zero-threshold",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalableConfig {
    epsilon: f64,
    pub start: usize,
    pub floor_policy: FloorPolicy,
    /// Branch-and-bound node limit per round; `None` is unlimited.
    pub node_budget: Option<u64>,
}

impl ScalableConfig {
    /// `epsilon` must lie strictly between 0 and 1.
    pub fn new(epsilon: f64) -> Result<Self, SolveError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(SolveError::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        Ok(Self {
            epsilon,
            start: 0,
            floor_policy: FloorPolicy::Error,
            node_budget: None,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn with_start(mut self, start: usize) -> Self {
        self.start = start;
        self
    }

    pub fn with_floor_policy(mut self, policy: FloorPolicy) -> Self {
        self.floor_policy = policy;
        self
    }

    pub fn with_node_budget(mut self, budget: Option<u64>) -> Self {
        self.node_budget = budget;
        self
    }
}

impl Default for ScalableConfig {
    fn default() -> Self {
        Self::new(DEFAULT_EPSILON).expect("default epsilon is valid")
    }
}

/// One threshold round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Round {
    pub threshold: f64,
    pub coreset_size: usize,
    pub edges: usize,
    pub ilp_nodes: u64,
    pub feasible: bool,
}

#[derive(Debug, Clone)]
pub struct ScalableRun {
    pub solution: Solution,
    /// The greedy seed `U`.
    pub greedy: Vec<usize>,
    pub greedy_diversity: f64,
    pub rounds: Vec<Round>,
}

/// Runs the coreset solver; see the module docs.
///
/// Diagnostics: `iterations`, `initial_threshold` (`2·div(U)`),
/// `final_threshold` (the last `d'`), `greedy_diversity`, `coreset_size`
/// (final round), `coreset_max`, `ilp_nodes` and `elapsed_ms`.
pub fn solve_scalable(
    dataset: &GroupedDataset,
    fc: &FairnessConstraints,
    config: &ScalableConfig,
) -> Result<Solution, SolveError> {
    solve_scalable_traced(dataset, fc, config).map(|run| run.solution)
}

/// [`solve_scalable`] plus the greedy seed and per-round records.
pub fn solve_scalable_traced(
    dataset: &GroupedDataset,
    fc: &FairnessConstraints,
    config: &ScalableConfig,
) -> Result<ScalableRun, SolveError> {
    let started = Instant::now();
    validate_constraints(dataset, fc).map_err(SolveError::InvalidConstraints)?;
    let k = fc.k;
    if k < 2 {
        return Err(SolveError::InvalidParameter(format!(
            "the scalable solver needs k >= 2, got {k}"
        )));
    }
    let greedy = gmm(dataset, k, config.start)?;
    let greedy_diversity = div(dataset, &greedy);
    let initial = 2.0 * greedy_diversity;

    let mut fills = (0..dataset.group_count())
        .map(|c| {
            let seed: Vec<usize> = greedy.iter().copied().filter(|&id| dataset.group_of(id) == c).collect();
            GroupFill::new(dataset, c, &seed)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rounds: Vec<Round> = Vec::new();
    let mut threshold = initial;
    let mut floor_reached = false;
    loop {
        for fill in &mut fills {
            fill.extend(threshold, k);
        }
        let coreset: Vec<usize> = fills.iter().flat_map(|f| f.selected().iter().copied()).collect();
        let delta = if floor_reached { 0.0 } else { threshold / 2.0 };
        let graph = build_threshold_graph(dataset, &coreset, delta)?;
        let outcome = solve_fis(&graph, dataset, fc, config.node_budget)?;
        let mut round = Round {
            threshold,
            coreset_size: graph.vertex_count(),
            edges: graph.edge_count(),
            ilp_nodes: outcome.nodes_explored,
            feasible: false,
        };
        match outcome.status {
            FisStatus::Feasible(ids) => {
                round.feasible = true;
                rounds.push(round);
                let mut diag = Diagnostics::default();
                diag.set_count("iterations", rounds.len() as u64);
                diag.set_real("initial_threshold", initial);
                diag.set_real("final_threshold", threshold);
                diag.set_real("greedy_diversity", greedy_diversity);
                diag.set_count("coreset_size", graph.vertex_count() as u64);
                diag.set_count(
                    "coreset_max",
                    rounds.iter().map(|r| r.coreset_size).max().unwrap_or(0) as u64,
                );
                diag.set_count("ilp_nodes", rounds.iter().map(|r| r.ilp_nodes).sum());
                diag.set_real("elapsed_ms", started.elapsed().as_secs_f64() * 1e3);
                let solution = Solution::new(dataset, ids, diag);
                return Ok(ScalableRun {
                    solution,
                    greedy,
                    greedy_diversity,
                    rounds,
                });
            }
            FisStatus::BudgetExhausted => {
                return Err(SolveError::NodeBudget {
                    nodes: outcome.nodes_explored,
                    best: None,
                })
            }
            FisStatus::Infeasible => rounds.push(round),
        }

        if floor_reached || !can_progress(dataset, &graph, &fills, k) {
            if floor_reached || config.floor_policy == FloorPolicy::Error {
                return Err(SolveError::Degenerate {
                    threshold,
                    groups: short_groups(dataset, fc, &fills),
                });
            }
            floor_reached = true;
            threshold = 0.0;
            continue;
        }
        threshold *= 1.0 - config.epsilon;
    }
}

/// Whether some smaller positive threshold changes the coreset or drops an
/// edge from its graph. If not, every later round would repeat this one.
fn can_progress(
    dataset: &GroupedDataset,
    graph: &crate::fis::ThresholdGraph,
    fills: &[GroupFill<'_>],
    cap: usize,
) -> bool {
    let vertices = graph.vertices();
    let removable_edge = graph
        .edges()
        .any(|(a, b)| dataset.distance(vertices[a], vertices[b]) > 0.0);
    removable_edge || fills.iter().any(|f| f.next_admission(cap).is_some())
}

/// Groups whose coreset share has fewer pairwise-distinct points than their
/// lower bound; if there are none, the groups holding duplicates.
fn short_groups(dataset: &GroupedDataset, fc: &FairnessConstraints, fills: &[GroupFill<'_>]) -> Vec<usize> {
    let distinct: Vec<usize> = fills
        .iter()
        .map(|f| {
            let ids = f.selected();
            (0..ids.len())
                .filter(|&a| (0..a).all(|b| dataset.distance(ids[a], ids[b]) > 0.0))
                .count()
        })
        .collect();
    let below_lower: Vec<usize> = (0..fills.len()).filter(|&c| distinct[c] < fc.lower(c)).collect();
    if !below_lower.is_empty() {
        return below_lower;
    }
    (0..fills.len())
        .filter(|&c| distinct[c] < fills[c].selected().len())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricKind;

    fn line(xs: &[f64], groups: &[usize]) -> GroupedDataset {
        GroupedDataset::from_rows(xs.iter().map(|&x| vec![x]).collect(), groups.to_vec(), MetricKind::L1).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(ScalableConfig::new(0.0).is_err());
        assert!(ScalableConfig::new(1.0).is_err());
        assert!(ScalableConfig::new(f64::NAN).is_err());
        let c = ScalableConfig::default();
        assert_eq!(c.epsilon(), 0.05);
        assert_eq!(c.start, 0);
        assert_eq!(c.floor_policy, FloorPolicy::Error);
        assert_eq!(
            "zero-threshold".parse::<FloorPolicy>().unwrap(),
            FloorPolicy::ZeroThreshold
        );
        assert!("zero".parse::<FloorPolicy>().is_err());
    }

    #[test]
    fn line_of_ten_meets_bound() {
        let ds = line(
            &(0..10).map(f64::from).collect::<Vec<_>>(),
            &(0..10).map(|i| i % 2).collect::<Vec<_>>(),
        );
        let fc = FairnessConstraints::new(4, vec![(1, 3), (1, 3)]);
        let run = solve_scalable_traced(&ds, &fc, &ScalableConfig::default()).unwrap();
        let sol = &run.solution;
        assert!(sol.verify(&ds, Some(&fc)).is_empty());
        assert!(sol.diversity >= 0.95 / 5.0 * 3.0, "{}", sol.diversity);
        assert!(sol.diversity <= 2.0 * run.greedy_diversity);
        assert!(run.rounds.iter().all(|r| r.coreset_size <= 2 * 4));
    }

    #[test]
    fn k_equals_n_takes_everything_at_once() {
        let ds = line(&[0.0, 3.0, 4.5, 10.0], &[0, 1, 0, 1]);
        let fc = FairnessConstraints::new(4, vec![(2, 2), (2, 2)]);
        let run = solve_scalable_traced(&ds, &fc, &ScalableConfig::default()).unwrap();
        assert_eq!(run.solution.selected, vec![0, 1, 2, 3]);
        assert_eq!(run.solution.diversity, 1.5);
        assert_eq!(run.rounds.len(), 1);
    }

    #[test]
    fn all_duplicates_give_zero_diversity() {
        let ds = line(&[2.0; 6], &[0, 1, 0, 1, 0, 1]);
        let fc = FairnessConstraints::new(4, vec![(2, 2), (2, 2)]);
        let sol = solve_scalable(&ds, &fc, &ScalableConfig::default()).unwrap();
        assert_eq!(sol.diversity, 0.0);
        assert!(sol.verify(&ds, Some(&fc)).is_empty());
    }

    fn duplicate_heavy() -> (GroupedDataset, FairnessConstraints) {
        // Group 0 has only one distinct point but must supply two items.
        let ds = line(&[0.0, 0.0, 0.0, 5.0, 9.0, 14.0], &[0, 0, 0, 1, 1, 1]);
        (ds, FairnessConstraints::new(3, vec![(2, 2), (1, 1)]))
    }

    #[test]
    fn degenerate_instance_is_diagnosed() {
        let (ds, fc) = duplicate_heavy();
        match solve_scalable(&ds, &fc, &ScalableConfig::default()) {
            Err(SolveError::Degenerate { groups, threshold }) => {
                assert_eq!(groups, vec![0]);
                assert!(threshold > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_threshold_policy_recovers() {
        let (ds, fc) = duplicate_heavy();
        let config = ScalableConfig::default().with_floor_policy(FloorPolicy::ZeroThreshold);
        let sol = solve_scalable(&ds, &fc, &config).unwrap();
        assert!(sol.verify(&ds, Some(&fc)).is_empty());
        assert_eq!(sol.diversity, 0.0);
    }

    #[test]
    fn start_item_is_configurable() {
        let ds = line(
            &(0..12).map(|i| f64::from(i * i)).collect::<Vec<_>>(),
            &(0..12).map(|i| i % 3).collect::<Vec<_>>(),
        );
        let fc = FairnessConstraints::new(3, vec![(1, 1), (1, 1), (1, 1)]);
        for start in 0..12 {
            let run = solve_scalable_traced(&ds, &fc, &ScalableConfig::default().with_start(start)).unwrap();
            assert_eq!(run.greedy[0], start);
            assert!(run.solution.verify(&ds, Some(&fc)).is_empty());
        }
        assert!(solve_scalable(&ds, &fc, &ScalableConfig::default().with_start(12)).is_err());
    }
}
