use std::path::PathBuf;

use thiserror::Error;

use crate::dataset::ValidationReport;
use crate::solution::Solution;

/// Failures while building, loading or generating a dataset.
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV near row {row}: {message}")]
    Csv { row: u64, message: String },
    #[error("row {row} has {found} columns, expected {expected}")]
    Ragged { row: u64, expected: usize, found: usize },
    #[error("row {row}, column {column}: {value:?} is not a number")]
    NonNumeric { row: u64, column: usize, value: String },
    #[error("row {row}, column {column}: value {value:?} is not finite")]
    NonFinite { row: u64, column: usize, value: String },
    #[error("row {row}: group label is empty")]
    EmptyGroupLabel { row: u64 },
    #[error("group column {0:?} does not name or index a column")]
    UnknownGroupColumn(String),
    #[error("input has no data rows")]
    NoRows,
    #[error("input has no feature columns")]
    NoFeatures,
    #[error("item {item} has {found} features, expected {expected}")]
    DimensionMismatch { item: usize, expected: usize, found: usize },
    #[error("item {item}: feature {index} is not finite")]
    NonFiniteFeature { item: usize, index: usize },
    #[error("item at position {position} has id {found}; ids must be 0..n-1 in order")]
    IdOutOfOrder { position: usize, found: usize },
    #[error("item {item} is in group {group}, but only {groups} groups are declared")]
    GroupOutOfRange { item: usize, group: usize, groups: usize },
    #[error("group {0} has no items")]
    EmptyGroup(usize),
    #[error("at least one group is required")]
    NoGroups,
    #[error("item {0} is the zero vector, which has no angle")]
    ZeroVector(usize),
    #[error("cannot fill {groups} groups with only {n} items")]
    TooFewItems { n: usize, groups: usize },
    #[error("k = {k} must be between 1 and n = {n}")]
    InvalidK { k: usize, n: usize },
    #[error("alpha must lie in [0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("cannot parse bounds {0:?}; expected l1:h1,l2:h2,...")]
    BoundsSyntax(String),
    #[error("derived bounds are infeasible: {0}")]
    InfeasibleBounds(ValidationReport),
}

/// Failures of the distance-level helpers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("pairwise distances need at least 2 items, got {0}")]
    TooFewItems(usize),
    #[error("{n} items exceed the pairwise-distance limit of {max} items")]
    PairwiseBudget { n: usize, max: usize },
    #[error("candidate set is empty")]
    EmptyCandidates,
    #[error("anchor set is empty")]
    EmptyAnchor,
}

/// Failures of the solvers (exact, scalable, greedy, oracle, FIS).
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("constraints are infeasible: {0}")]
    InvalidConstraints(ValidationReport),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("branch-and-bound node budget exhausted after {nodes} nodes")]
    NodeBudget {
        nodes: u64,
        /// Best feasible subset found before the budget ran out.
        best: Option<Box<Solution>>,
    },
    #[error(
        "degenerate instance: threshold decayed to {threshold:e} without a feasible set; \
         groups lacking distinct points: {groups:?}"
    )]
    Degenerate { threshold: f64, groups: Vec<usize> },
    #[error("enumeration of {} subsets exceeds the budget of {budget}", subset_count(.subsets))]
    EnumerationBudget { subsets: u128, budget: u64 },
}

fn subset_count(subsets: &u128) -> String {
    if *subsets == u128::MAX {
        "more than 2^128".to_string()
    } else {
        subsets.to_string()
    }
}
