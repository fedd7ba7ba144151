//! Brute-force ground truth. Enumerates every `k`-subset in lexicographic
//! order and keeps the first one with the largest diversity. No pruning.

use itertools::Itertools;

use crate::dataset::{validate_constraints, FairnessConstraints, GroupedDataset};
use crate::error::SolveError;
use crate::geometry::div;
use crate::solution::{Diagnostics, Solution};

/// Default limit on the number of enumerated subsets.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Optimal fair subset by exhaustive enumeration.
pub fn brute_force_fmmd(
    dataset: &GroupedDataset,
    fc: &FairnessConstraints,
    budget: u64,
) -> Result<Solution, SolveError> {
    validate_constraints(dataset, fc).map_err(SolveError::InvalidConstraints)?;
    enumerate(dataset, fc.k, budget, |ids| fc.admits(&dataset.count_groups(ids)))
}

/// Optimal unconstrained subset of size `k` by exhaustive enumeration.
pub fn brute_force_mmd(dataset: &GroupedDataset, k: usize, budget: u64) -> Result<Solution, SolveError> {
    if k == 0 || k > dataset.len() {
        return Err(SolveError::InvalidParameter(format!(
            "k = {k} must be between 1 and n = {}",
            dataset.len()
        )));
    }
    enumerate(dataset, k, budget, |_| true)
}

fn enumerate(
    dataset: &GroupedDataset,
    k: usize,
    budget: u64,
    admits: impl Fn(&[usize]) -> bool,
) -> Result<Solution, SolveError> {
    let subsets = binomial(dataset.len(), k);
    if subsets > u128::from(budget) {
        return Err(SolveError::EnumerationBudget { subsets, budget });
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut feasible = 0u64;
    for ids in (0..dataset.len()).combinations(k) {
        if !admits(&ids) {
            continue;
        }
        feasible += 1;
        let value = div(dataset, &ids);
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((ids, value));
        }
    }
    let (ids, _) = best.ok_or_else(|| SolveError::InvalidParameter("no feasible subset exists".into()))?;
    let mut diag = Diagnostics::default();
    diag.set_count("subsets", subsets as u64);
    diag.set_count("feasible_subsets", feasible);
    Ok(Solution::new(dataset, ids, diag))
}
